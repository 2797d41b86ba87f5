use std::fs::File;

use hn_hartree::cayley::bubble_pushforward_constant;
use hn_hartree::constants::{koranyi_sphere_mass_closed, sphere_volume};
use hn_hartree::quadrature::golden_min;
use hn_hartree::reduced::{
    boundary_exclusion, critical_scale, l2_growth, reduced_coeffs, reduced_energy, second_derivative_at_critical,
    solve_reduced_system, HalfSpaceRobin, QuadraticRobin, ReducedCoeffs, ReducedState, RobinField, SearchBox,
    TabulatedRobin,
};
use hn_hartree::Params;

use crate::config::RunConfig;
use crate::report::Checks;

/// (epsilon, R) pairs for the scale checks.
pub const STATES: [(f64, f64); 3] = [(0.01, 1.0), (0.2, 0.4), (1e-4, 3.0)];

pub fn run(cfg: &RunConfig, out: &mut Checks) {
    let p = &cfg.params;
    if p.q < 5 {
        // int U^2 diverges: record the logarithmic ladder instead
        match l2_growth(p.n, &[10.0, 100.0, 1000.0, 10000.0], 48) {
            Ok(g) => {
                let per_decade = koranyi_sphere_mass_closed(p.n) * 10f64.ln();
                out.holds("l2_mass_diverges", !g.converges);
                for (k, inc) in g.increments.iter().enumerate().skip(1) {
                    out.relative(&format!("l2_decade_increment{k}"), *inc, per_decade, 1e-4);
                }
            }
            Err(e) => {
                out.error("l2_growth", e);
            }
        }
        out.report("reduced_energy_defined", 0.0, None)
            .annotate("the eps |U|_2^2 term needs Q > 4; scale checks skipped");
        return;
    }
    let c = match reduced_coeffs(p, &cfg.quadrature) {
        Ok(c) => c,
        Err(e) => {
            out.error("reduced_coefficients", e);
            return;
        }
    };
    let transported = bubble_pushforward_constant(p.n).powf(p.q_star) * sphere_volume(p.n);
    out.relative("a_q_vs_sphere_transport", c.a_q, transported, 1e-6);
    out.report("a_q", c.a_q, None);
    out.report("b_q", c.b_q, None);
    out.report("u_l2", c.u_l2, None);
    out.report("alpha", c.alpha, None);
    out.report("omega_q", c.omega_q, None);

    for (k, (eps, r)) in STATES.iter().enumerate() {
        if let Err(e) = scale_checks(k, *eps, *r, &c, p, out) {
            out.error(&format!("state{k}"), e);
        }
    }
    system(cfg, &c, out);
}

fn scale_checks(k: usize, eps: f64, r: f64, c: &ReducedCoeffs, p: &Params, out: &mut Checks) -> hn_hartree::Result<()> {
    let q = p.qf();
    let ls = critical_scale(r, eps, c, p)?;
    let f = |l: f64| reduced_energy(&ReducedState::new(eps, l, r, vec![]).unwrap(), c, p);
    let found = golden_min(f, 0.2 * ls, 5.0 * ls, 1e-12 * ls);
    out.relative(&format!("state{k}_argmin"), found, ls, 1e-6);
    let h = 1e-3 * ls;
    let second = (f(ls + h) - 2.0 * f(ls) + f(ls - h)) / (h * h);
    out.at_least(&format!("state{k}_second_difference"), second, 0.0);
    out.report(&format!("state{k}_second_derivative_closed"), second_derivative_at_critical(r, eps, c, p)?, Some(second));
    let ratio = critical_scale(r, eps / 16.0, c, p)? / ls;
    out.absolute(&format!("state{k}_eps_power_law"), ratio, 16f64.powf(1.0 / (q - 4.0)), 1e-12);
    let b = boundary_exclusion(r, eps, c, p)?;
    out.at_least(&format!("state{k}_boundary_margin"), b.c0(), f64::MIN_POSITIVE);
    out.relative(&format!("state{k}_b_tilde"), b.b_tilde_measured, b.b_tilde_closed, 1e-9);
    Ok(())
}

/// Root of the stationary system on a tabulated field when one is given,
/// otherwise on the quadratic model; the half-space model must have none.
fn system(cfg: &RunConfig, c: &ReducedCoeffs, out: &mut Checks) {
    let p = &cfg.params;
    let dim = p.dim();
    let eps = STATES[0].0;
    let solve = |field: &dyn RobinField, bx: &SearchBox| solve_reduced_system(field, eps, bx, c, p);

    let (label, result) = match &cfg.robin_csv {
        Some(path) => {
            let field = File::open(path)
                .map_err(|e| hn_hartree::HnError::InvalidArgument(format!("{}: {e}", path.display())))
                .and_then(|f| TabulatedRobin::from_csv(p.n, f));
            match field {
                Ok(field) => {
                    let (lo, hi) = field.bounds();
                    ("tabulated", SearchBox::new(lo, hi).and_then(|bx| solve(&field, &bx)))
                }
                Err(e) => ("tabulated", Err(e)),
            }
        }
        None => {
            let field = QuadraticRobin { n: p.n, base: 1.0, curvature: 1.0 };
            let center: Vec<f64> = (0..dim).map(|k| 0.1 * (k as f64 - 1.0)).collect();
            ("quadratic", solve(&field, &SearchBox::centered(&center, 1.0)))
        }
    };
    match result {
        Ok(s) => {
            out.holds(&format!("system_{label}_converged"), s.converged);
            out.at_most(&format!("system_{label}_residual"), s.residual, 1e-10);
            out.report(&format!("system_{label}_lambda"), s.lambda, None);
            out.report(&format!("system_{label}_t"), s.t, None);
            for (k, v) in s.xi.coords().iter().enumerate() {
                out.report(&format!("system_{label}_xi{k}"), *v, None);
            }
        }
        Err(e) => {
            out.error(&format!("system_{label}"), e);
        }
    }

    let mut lo = vec![-0.5; dim];
    let mut hi = vec![0.5; dim];
    lo[0] = 0.1;
    hi[0] = 1.0;
    match SearchBox::new(lo, hi).and_then(|bx| solve(&HalfSpaceRobin { params: *p }, &bx)) {
        Ok(s) => {
            out.holds("system_half_space_has_no_root", !s.converged);
        }
        Err(e) => {
            out.error("system_half_space", e);
        }
    }
}
