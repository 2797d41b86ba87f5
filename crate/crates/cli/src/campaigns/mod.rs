mod bubble;
mod constants;
mod group;
mod pohozaev;
mod reduced;
mod spectral;

use hn_hartree::quadrature::DecayFit;
use hn_hartree::spectral::KappaRow;
use hn_hartree::GroupElement;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Campaign, RunConfig};
use crate::report::Checks;

/// Tables written next to the report.
#[derive(Debug, Default, Clone)]
pub struct Artifacts {
    pub kappa_table: Vec<KappaRow>,
    pub decay_fits: Vec<DecayFit>,
}

pub fn run_campaign(c: Campaign, cfg: &RunConfig, art: &mut Artifacts) -> Checks {
    let mut out = Checks::default();
    match c {
        Campaign::Group => group::group(cfg, &mut out),
        Campaign::Cayley => group::cayley(cfg, &mut out),
        Campaign::Constants => constants::run(cfg, &mut out),
        Campaign::Spectral => spectral::run(cfg, &mut out, art),
        Campaign::Bubble => bubble::run(cfg, &mut out, art),
        Campaign::Pohozaev => pohozaev::run(cfg, &mut out),
        Campaign::Reduced => reduced::run(cfg, &mut out),
        Campaign::All => unreachable!("expanded by the schedule"),
    }
    out
}

/// One stream per campaign, derived from the run seed.
fn stream(cfg: &RunConfig, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.quadrature.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_point(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> GroupElement {
    let c: Vec<f64> = (0..2 * n + 1).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    GroupElement::from_coords(&c)
}

/// Largest relative distance between coordinate vectors, measured against
/// max(1, |b|_inf) so that points near the origin are compared absolutely.
fn coord_gap(a: &GroupElement, b: &GroupElement) -> f64 {
    let (ca, cb) = (a.coords(), b.coords());
    let scale = cb.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// max |r_i / r_0 - 1|
fn spread(values: &[f64]) -> f64 {
    let r0 = values[0];
    values.iter().map(|v| (v / r0 - 1.0).abs()).fold(0.0, f64::max)
}
