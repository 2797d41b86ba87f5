use std::f64::consts::PI;

use rand::SeedableRng;

use super::*;
use crate::constants::ln_funk;
use crate::parallel::with_threads;
use crate::special::sphere_area;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn e(i: usize, j: usize, mu: f64, n: usize) -> f64 {
    ln_funk(i, j, mu, n).exp()
}

fn test_points(n: usize) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    (0..5).map(|_| SpherePoint::sample(n, &mut rng)).collect()
}

#[test]
fn constructor_normalizes() {
    let p = SpherePoint::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
    assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
    assert_eq!(p.zeta[1], c(0.0, 0.8));
    assert!(SpherePoint::new(vec![c(0.0, 0.0); 2]).is_err());
    assert!(SpherePoint::new(vec![c(1.0, 0.0)]).is_err());
    let q = SpherePoint::from_real(&p.real_coords()).unwrap();
    assert_eq!(p, q);
}

#[test]
fn kernel_examples() {
    let a = SpherePoint::north(1);
    let mut b = SpherePoint::north(1);
    b.zeta[1] = c(-1.0, 0.0);
    assert!((chordal_kernel(&a, &b, 1.5).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
    let o = SpherePoint::from_unit(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(chordal_kernel(&a, &o, 0.7).unwrap(), 1.0);
    assert_eq!(chordal_kernel(&a, &a, 1.0), Err(HnError::Singular));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = SpherePoint::sample(2, &mut rng);
        let q = SpherePoint::sample(2, &mut rng);
        let (x, y) = (chordal_kernel(&p, &q, 1.3).unwrap(), chordal_kernel(&q, &p, 1.3).unwrap());
        assert!((x - y).abs() <= 1e-15 * x);
    }
}

fn binom_f(a: usize, b: usize) -> u128 {
    let mut r = 1u128;
    for k in 0..b {
        r = r * (a - k) as u128 / (k as u128 + 1);
    }
    r
}

#[test]
fn harmonic_dimensions() {
    for n in 1..5 {
        assert_eq!(sphere_dim(HarmonicIndex::new(0, 0), n + 1).unwrap(), 1);
        assert_eq!(sphere_dim(HarmonicIndex::new(1, 0), n + 1).unwrap(), (n + 1) as u128);
    }
    for m in 2..6 {
        for i in 0..=6 {
            for j in 0..=6 {
                let d = sphere_dim(HarmonicIndex::new(i, j), m).unwrap();
                assert_eq!(d, sphere_dim(HarmonicIndex::new(j, i), m).unwrap());
                // harmonic (i,j) polynomials: all of bidegree (i,j) modulo |zeta|^2 times bidegree (i-1,j-1)
                let all = binom_f(i + m - 1, i) * binom_f(j + m - 1, j);
                let lower = if i > 0 && j > 0 { binom_f(i + m - 2, i - 1) * binom_f(j + m - 2, j - 1) } else { 0 };
                assert_eq!(d, all - lower, "i={i} j={j} m={m}");
            }
        }
    }
    assert!(sphere_dim(HarmonicIndex::new(1, 1), 1).is_err());
}

#[test]
fn harmonics_orthonormal() {
    // eight 3-sigma checks on one stream; seed 5 happens to put n = 2 at 3.2 sigma
    // while ten seeds scatter evenly around 1
    let s = SphereSampler::new(7, 1_000_000);
    for n in 1..3 {
        let v = sphere_integrate_many(
            n,
            4,
            |z| {
                let a = harmonic_10(1, z).unwrap();
                let b = harmonic_10(2, z).unwrap();
                let r = harmonic_01(n + 1, z).unwrap();
                Some(vec![a * a, a * b, r * r, a * r])
            },
            &s,
        )
        .unwrap();
        assert!(v[0].z_score(1.0) < 3.0, "n={n} {:?}", v[0]);
        assert!(v[1].z_score(0.0) < 3.0);
        assert!(v[2].z_score(1.0) < 3.0);
        assert!(v[3].z_score(0.0) < 3.0);
    }
    let real = SpherePoint::new(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
    assert_eq!(harmonic_10(1, &real).unwrap(), 0.0);
    assert!(harmonic_10(0, &real).is_err());
    assert!(harmonic_01(3, &real).is_err());
}

#[test]
fn printed_harmonic_constant() {
    for n in 1..5 {
        let mass = harmonic_norm_display(n).powi(2) * sphere_volume(n) / (2.0 * n as f64 + 2.0);
        let want = sphere_area(2 * n + 2) / sphere_area(2 * n + 1);
        assert!((mass - want).abs() < 1e-13);
    }
    assert!((harmonic_norm_display(1).powi(2) - 1.0 / PI).abs() < 1e-15);
    assert!((harmonic_norm_display(1).powi(2) * PI * PI / 2.0 - PI / 2.0).abs() < 1e-14);
}

#[test]
fn integrate_basics() {
    let s = SphereSampler::new(11, 200_000);
    let one = sphere_integrate(1, |_| 1.0, &s).unwrap();
    assert!((one.estimate - 2.0 * PI * PI).abs() < 1e-12);
    for n in 1..4 {
        assert!((sphere_volume(n) - sphere_area(2 * n + 2)).abs() < 1e-12 * sphere_volume(n));
    }
    let odd = sphere_integrate(1, |z| z.zeta[0].re, &s).unwrap();
    assert!(odd.z_score(0.0) < 3.0);
    let sq = sphere_integrate(1, |z| z.zeta[0].norm_sqr(), &s).unwrap();
    assert!(sq.z_score(PI * PI) < 3.0, "{sq:?}");
    let bad = sphere_integrate(1, |z| if z.zeta[0].re > 0.0 { f64::NAN } else { 1.0 }, &s).unwrap();
    assert!(bad.rejected > 90_000 && bad.rejected < 110_000);
}

#[test]
fn frame_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..4 {
        let z = SpherePoint::sample(n, &mut rng);
        let cols = frame(&z);
        for a in 0..=n {
            for b in 0..=n {
                let ip: Complex64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y.conj()).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-13);
            }
        }
        assert_eq!(cols[n], z.zeta);
    }
}

#[test]
fn funk_hecke_constant_mode() {
    let s = SphereSampler::new(21, 400_000);
    let z = &test_points(1)[0];
    let est = funk_hecke_apply(1.0, |_| 1.0, z, &s).unwrap();
    assert!((e(0, 0, 2.0, 1) - 8.0 * PI).abs() < 1e-12);
    assert!(est.z_score(8.0 * PI) < 3.0, "{est:?}");
    assert!(est.std_error < 0.01 * 8.0 * PI);
}

#[test]
fn funk_hecke_first_harmonic() {
    let s = SphereSampler::new(22, 400_000);
    // mu/(4n - mu + 4) = 1/3 of E_{0,0}(2) = 8 pi
    let want = e(1, 0, 2.0, 1);
    assert!((want - 8.0 * PI / 3.0).abs() < 1e-12);
    for z in test_points(1) {
        let y = |p: &SpherePoint| harmonic_10(1, p).unwrap();
        let est = funk_hecke_apply(1.0, y, &z, &s).unwrap();
        assert!(est.z_score(want * y(&z)) < 3.0, "{est:?} vs {}", want * y(&z));
    }
}

type Poly = fn(&SpherePoint) -> f64;

#[test]
fn funk_hecke_low_degrees() {
    let polys: [(usize, usize, Poly); 6] = [
        (0, 0, |_| 1.0),
        (1, 0, |p| p.zeta[0].im),
        (0, 1, |p| p.zeta[1].re),
        (2, 0, |p| (p.zeta[0] * p.zeta[0]).re),
        (1, 1, |p| (p.zeta[0] * p.zeta[1].conj()).im),
        (1, 1, |p| p.zeta[0].norm_sqr() - p.zeta[1].norm_sqr()),
    ];
    let s = SphereSampler::new(23, 200_000);
    for n in 1..3 {
        for &mu in &[1.0, 2.0, 3.0] {
            for (k, (i, j, y)) in polys.iter().enumerate() {
                let z = &test_points(n)[k % 5];
                let want = e(*i, *j, mu, n) * y(z);
                let est = funk_hecke_apply(mu / 2.0, y, z, &s).unwrap();
                assert!(est.z_score(want) < 4.0, "n={n} mu={mu} ({i},{j}): {est:?} vs {want}");
            }
        }
    }
}

#[test]
fn uniform_variant_agrees() {
    let s = SphereSampler::new(24, 400_000);
    let z = &test_points(1)[2];
    let y = |p: &SpherePoint| 1.0 + p.zeta[0].re;
    let a = funk_hecke_apply(0.5, y, z, &s).unwrap();
    let b = funk_hecke_apply_uniform(0.5, y, z, &s).unwrap();
    let sd = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() < 4.0 * sd, "{a:?} {b:?}");
    assert!(funk_hecke_apply(2.0, y, z, &s).is_err());
}

#[test]
fn weighted_inequality() {
    let s = SphereSampler::new(31, 200_000);
    for &mu in &[1.0, 2.0, 3.0] {
        // equality for constants
        let k = weighted_kernel_check(1, mu, |_| 1.0, &s).unwrap();
        assert!(k.gap.z_score(0.0) < 3.0, "mu={mu} {k:?}");
        let shapes: [Poly; 2] = [
            |p| 1.0 + 0.8 * p.zeta[0].re - 0.5 * p.zeta[1].im,
            |p| (p.zeta[0] * p.zeta[1]).re + 2.0 * p.zeta[1].norm_sqr(),
        ];
        for f in shapes {
            let k = weighted_kernel_check(1, mu, f, &s).unwrap();
            assert!(k.gap.estimate > -3.0 * k.gap.std_error, "mu={mu} {k:?}");
        }
    }
    // a pure first-order harmonic sits strictly above the bound
    let k = weighted_kernel_check(1, 2.0, |p| p.zeta[0].re, &s).unwrap();
    assert!(k.gap.estimate > 5.0 * k.gap.std_error);
}

#[test]
fn energy_examples() {
    let s = SphereSampler::new(41, 200_000);
    let cst = sphere_energy(1, |x| Jet2::constant(3.0, x.len()), GradientKind::Riemannian, &s).unwrap();
    assert!((cst.energy.estimate - 0.5 * 9.0 * 2.0 * PI * PI).abs() < 1e-10);
    assert_eq!(cst.gradient.estimate, 0.0);
    // F = Re zeta_1 on S^3: |grad|^2 = 1 - x_1^2, so E = vol (3/4 + 1/8)
    let lin = sphere_energy(1, |x| x[0].clone(), GradientKind::Riemannian, &s).unwrap();
    let vol = 2.0 * PI * PI;
    assert!(lin.energy.z_score(7.0 * vol / 8.0) < 3.0, "{lin:?}");
    assert!(lin.gradient.z_score(0.75 * vol) < 3.0);
    let wig = sphere_energy(2, |x| (&x[0] * &x[4]).exp(), GradientKind::Horizontal, &s).unwrap();
    assert!(wig.energy.estimate > 0.0 && wig.gradient.estimate >= 0.0);
}

#[test]
fn modulated_energy_coefficient() {
    let s = SphereSampler::new(42, 50_000);
    for n in 1..3 {
        let f = |x: &[Jet2]| (&x[0] * &x[1]).add_const(1.0).powi(2);
        let r = modulated_energy_check(n, f, GradientKind::Riemannian, &s).unwrap();
        assert!((r.coefficient - (2 * n + 1) as f64).abs() < 1e-10, "n={n} {r:?}");
        let h = modulated_energy_check(n, f, GradientKind::Horizontal, &s).unwrap();
        assert!((h.coefficient - (2 * n) as f64).abs() < 1e-10, "n={n} {h:?}");
        assert_eq!(r.stated_coefficient, (n * n) as f64 / 2.0);
    }
}

#[test]
fn sampler_determinism() {
    let s = SphereSampler::new(99, 50_000);
    let z = &test_points(2)[1];
    let y = |p: &SpherePoint| p.zeta[2].im + p.zeta[0].norm_sqr();
    let a = with_threads(1, || funk_hecke_apply(1.2, y, z, &s).unwrap());
    let b = with_threads(4, || funk_hecke_apply(1.2, y, z, &s).unwrap());
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let c2 = sphere_integrate(2, |p| p.zeta[0].re.exp(), &s).unwrap();
    let d2 = sphere_integrate(2, |p| p.zeta[0].re.exp(), &s).unwrap();
    assert_eq!(c2, d2);
}

