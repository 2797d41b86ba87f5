use hn_hartree::constants::ln_funk;
use hn_hartree::spectral::{classify_kernel, extract_b_constant, kappa_table};
use hn_hartree::sphere::{funk_hecke_apply, harmonic_01, harmonic_10};
use hn_hartree::{SpherePoint, SphereSampler};

use super::{stream, Artifacts};
use crate::config::RunConfig;
use crate::report::Checks;

const MAX_DEGREE: usize = 12;

pub fn run(cfg: &RunConfig, out: &mut Checks, art: &mut Artifacts) {
    let p = &cfg.params;
    let n = p.n;
    let k = classify_kernel(p, MAX_DEGREE);
    out.holds("kappa_ordering", k.ordering_holds);
    out.holds("kappa_monotone", k.monotone);
    out.absolute("kernel_multiplicity", k.multiplicity as f64, (2 * n + 2) as f64, 0.0);
    out.absolute("kernel_mode_count", k.kernel_modes.len() as f64, 2.0, 0.0);
    out.report("kappa_00_calibrated", k.kappa_00, None);
    out.report("kappa_max_higher_calibrated", k.max_higher, None);
    out.report("kappa_10_uncalibrated", k.raw_kappa_10, Some(1.0))
        .annotate("multiplier of the first-order modes with the constants as printed");

    let b = extract_b_constant(p);
    out.report("yamabe_b_direct", b.b_direct, Some(b.b_stated)).annotate("reference is n^2 as stated");
    out.report("yamabe_b_from_identity", b.b_from_identity, Some(b.b_direct));

    funk_hecke(cfg, out);
    art.kappa_table = kappa_table(n, MAX_DEGREE, 0.25);
}

/// MC application of the chordal kernel to Y in H_{0,0}, H_{1,0}, H_{0,1}.
fn funk_hecke(cfg: &RunConfig, out: &mut Checks) {
    let n = cfg.params.n;
    let q = cfg.params.qf();
    let mut rng = stream(cfg, 3);
    let zeta = SpherePoint::sample(n, &mut rng);
    let mut mus: Vec<f64> = [1.0, 2.0, 3.0].into_iter().filter(|m| *m < q).collect();
    if !mus.contains(&cfg.params.mu) {
        mus.push(cfg.params.mu);
    }
    type Harmonic = fn(&SpherePoint) -> f64;
    let modes: [(&str, usize, usize, Harmonic); 3] = [
        ("00", 0, 0, |_| 1.0),
        ("10", 1, 0, |z| harmonic_10(1, z).unwrap()),
        ("01", 0, 1, |z| harmonic_01(1, z).unwrap()),
    ];
    for (m, mu) in mus.iter().enumerate() {
        for (k, (label, i, j, y)) in modes.iter().enumerate() {
            let sampler = SphereSampler::new(cfg.quadrature.seed.wrapping_add((10 * m + k) as u64), cfg.quadrature.samples);
            let want = ln_funk(*i, *j, *mu, n).exp() * y(&zeta);
            let name = format!("funk_hecke_{label}_mu{mu}");
            match funk_hecke_apply(mu / 2.0, y, &zeta, &sampler) {
                Ok(est) => {
                    out.sigma(&name, est.estimate, want, est.std_error, 3.0);
                }
                Err(e) => {
                    out.error(&name, e);
                }
            }
        }
    }
}
