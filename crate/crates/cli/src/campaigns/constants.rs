use hn_hartree::constants::{constants_table, e00_at_2n, ln_funk};

use crate::config::RunConfig;
use crate::report::Checks;

const MAX_DEGREE: usize = 12;
const MU_STEP: f64 = 0.25;

pub fn run(cfg: &RunConfig, out: &mut Checks) {
    let p = &cfg.params;
    let n = p.n;
    let q = p.qf();
    let e = |i: usize, j: usize, mu: f64| ln_funk(i, j, mu, n).exp();
    let grid: Vec<f64> = (1..).map(|k| k as f64 * MU_STEP).take_while(|mu| *mu < q).collect();

    let (mut symmetry, mut monotone, mut ratio) = (0.0f64, true, 0.0f64);
    for &mu in &grid {
        for i in 0..=MAX_DEGREE {
            for j in 0..=MAX_DEGREE - i {
                let v = e(i, j, mu);
                symmetry = symmetry.max((v / e(j, i, mu) - 1.0).abs());
                if i + j < MAX_DEGREE {
                    monotone &= e(i + 1, j, mu) < v && e(i, j + 1, mu) < v;
                }
            }
        }
        let want = mu / (4.0 * n as f64 - mu + 4.0);
        ratio = ratio.max((e(1, 0, mu) / e(0, 0, mu) / want - 1.0).abs());
    }
    out.at_most("e_symmetry", symmetry, 1e-12);
    out.holds("e_monotone", monotone);
    out.at_most("e10_over_e00", ratio, 1e-12);
    let at_2n = 2.0 * n as f64;
    if at_2n < q {
        out.relative("e00_dual_formula", e(0, 0, at_2n), e00_at_2n(n), 1e-12);
    }

    // absolute constants as displayed; convention-dependent, never asserted
    for (name, value, formula) in constants_table(p).provenance() {
        out.report(name, value, None).annotate(formula);
    }
}
