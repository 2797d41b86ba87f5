use hn_hartree::constants::g_green;
use hn_hartree::pohozaev::{
    fundamental_constant_flux, pohozaev_scale, pohozaev_translation, robin_asymptotic, sphere_flux, GaugePower,
    PohozaevConfig, PohozaevReport,
};
use hn_hartree::GroupElement;

use crate::config::RunConfig;
use crate::report::Checks;

pub const RADII: [f64; 3] = [0.5, 1.0, 2.0];

/// Bubble centre, off the ball centre so that the translation balances
/// have non-trivial terms.
pub fn bubble_center(n: usize) -> GroupElement {
    let mut c = vec![0.0; 2 * n + 1];
    c[0] = 0.3;
    c[n] = -0.2;
    c[2 * n] = 0.25;
    GroupElement::from_coords(&c)
}

pub fn run(cfg: &RunConfig, out: &mut Checks) {
    let p = &cfg.params;
    let n = p.n;
    let origin = GroupElement::identity(n);
    for delta in RADII {
        let pc = match PohozaevConfig::calibrated(1.0, bubble_center(n), p.mu, delta, origin.clone(), 0.0, cfg.quadrature.clone()) {
            Ok(c) => c,
            Err(e) => {
                out.error(&format!("pohozaev_delta{delta}"), e);
                continue;
            }
        };
        let mut runs: Vec<(String, hn_hartree::Result<PohozaevReport>)> =
            vec![(format!("scale_delta{delta}"), pohozaev_scale(&pc))];
        for k in 0..2 * n {
            runs.push((format!("translation{k}_delta{delta}"), pohozaev_translation(&pc, k)));
        }
        for (name, r) in runs {
            match r {
                Ok(r) => {
                    out.at_most(&format!("{name}_relative_residual"), r.relative_residual(), 0.05);
                    out.report(&format!("{name}_literal_relative_residual"), r.literal_relative_residual(), None)
                        .annotate("multiplier taken literally: no 2t d_t part, or X_i in place of R_i");
                }
                Err(e) => {
                    out.error(&name, e);
                }
            }
        }
    }

    // unit flux fixes the fundamental constant; the displayed G(Q) is compared
    let c = fundamental_constant_flux(n);
    let gamma = GaugePower { pole: origin.clone(), coefficient: c };
    let flux = sphere_flux(&gamma, &origin, 1.3, 32);
    out.absolute("fundamental_unit_flux", flux, -1.0, 1e-8);
    out.report("fundamental_constant_displayed_over_flux", g_green(n) / c, Some(1.0))
        .annotate("G(Q) as displayed against 1/((Q-2) int_S |z|^2)");

    match robin_asymptotic(0.1, p) {
        Ok(r) => {
            out.report("robin_value_d0.1", r.value, None);
            out.report("robin_gradient_d0.1", r.gradient_magnitude, None);
        }
        Err(e) => {
            out.error("robin_asymptotic", e);
        }
    }
}
