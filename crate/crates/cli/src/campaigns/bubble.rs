use hn_hartree::bubble::{
    el_residual, el_residual_quadrature, kernel_element, lagrange_multiplier, lagrange_multiplier_closed,
    linearized_apply, linearized_apply_exact, sharp_constant_check, yamabe_ratio, BubbleParams,
};
use hn_hartree::hgroup::koranyi_norm;
use hn_hartree::quadrature::decay_regime_check;

use super::{random_point, spread, stream, Artifacts};
use crate::config::RunConfig;
use crate::report::Checks;

pub fn run(cfg: &RunConfig, out: &mut Checks, art: &mut Artifacts) {
    let p = &cfg.params;
    let (n, mu) = (p.n, p.mu);
    let nn = (n * n) as f64;
    let b = BubbleParams::unit(n);
    let spec = &cfg.quadrature;
    let mut rng = stream(cfg, 4);

    let pts: Vec<_> = (0..100)
        .map(|_| loop {
            let xi = random_point(n, &mut rng, 4.0);
            if koranyi_norm(&xi) <= 5.0 {
                break xi;
            }
        })
        .collect();

    let yam: Vec<f64> = pts.iter().map(|xi| yamabe_ratio(&b, xi)).collect();
    out.at_most("yamabe_ratio_spread", super::spread(&yam), 1e-8);
    out.report("yamabe_constant", yam[0], Some(nn)).annotate("reference n^2 as stated");
    out.report("yamabe_constant_vs_expansion", yam[0], Some(4.0 * nn))
        .annotate("reference 4n^2 from the expansion of the sub-Laplacian");

    let el: Vec<f64> = pts.iter().map(|xi| el_residual(&b, mu, xi).ratio).collect();
    out.at_most("el_ratio_spread", spread(&el), 1e-8);
    let alpha = lagrange_multiplier(&b, mu);
    out.relative("el_multiplier_closed_form", alpha, lagrange_multiplier_closed(n, mu), 1e-12);
    let mut el_quad = 0.0f64;
    for xi in pts.iter().take(5) {
        match el_residual_quadrature(&b, mu, xi, spec) {
            Ok(r) => el_quad = el_quad.max((r.ratio / alpha - 1.0).abs()),
            Err(e) => {
                out.error("el_quadrature", e);
                return;
            }
        }
    }
    out.at_most("el_quadrature_vs_closed_form", el_quad, 1e-2);

    // pointwise linearized operator on the kernel generators
    let (mut exact, mut quad) = (0.0f64, 0.0f64);
    for k in 1..=2 * n + 2 {
        let el = match kernel_element(k, p) {
            Ok(el) => el,
            Err(e) => {
                out.error("linearized_kernel", e);
                return;
            }
        };
        for xi in pts.iter().skip(5).take(10) {
            match (linearized_apply_exact(&el, mu, xi), linearized_apply(&el, el.decay(), &b, mu, xi, spec)) {
                (Ok(a), Ok(q)) => {
                    exact = exact.max(a.relative());
                    quad = quad.max(q.relative());
                }
                (Err(e), _) | (_, Err(e)) => {
                    out.error("linearized_kernel", e);
                    return;
                }
            }
        }
    }
    out.at_most("linearized_kernel_exact", exact, 1e-9);
    out.at_most("linearized_kernel_quadrature", quad, 1e-2);

    decay_fits(cfg, out, art);

    match sharp_constant_check(&b, mu, spec) {
        Ok(s) => {
            out.report("sharp_constant_quotient", s.measured, Some(s.closed_form))
                .annotate("reference C_{H,L}(Q,mu) as displayed");
        }
        Err(e) => {
            out.error("sharp_constant_quotient", e);
        }
    }
}

/// Riesz-potential decay in the three regimes theta < Q, theta = Q, theta > Q.
fn decay_fits(cfg: &RunConfig, out: &mut Checks, art: &mut Artifacts) {
    let p = &cfg.params;
    let q = p.qf();
    let below = q - if p.mu > 1.0 { 1.0 } else { p.mu / 2.0 };
    for theta in [below, q, q + 1.0] {
        let name = format!("decay_slope_theta{theta}");
        match decay_regime_check(p.n, p.mu, theta, &cfg.quadrature) {
            Ok(fit) => {
                out.absolute(&name, fit.fitted, fit.predicted, 0.05);
                art.decay_fits.push(fit);
            }
            Err(e) => {
                out.error(&name, e);
            }
        }
    }
}
