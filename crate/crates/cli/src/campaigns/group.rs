use hn_hartree::cayley::{self as ch, bubble_pushforward_constant, cayley_inv, distance_identity_check, jacobian, jacobian_numeric, pushforward};
use hn_hartree::bubble::{bubble_value, BubbleParams};
use hn_hartree::hgroup::{distance, koranyi_norm};
use hn_hartree::SpherePoint;

use super::{coord_gap, random_point, stream};
use crate::config::RunConfig;
use crate::report::Checks;

const CASES: usize = 1000;

pub fn group(cfg: &RunConfig, out: &mut Checks) {
    let n = cfg.params.n;
    let mut rng = stream(cfg, 1);
    let (mut assoc, mut inverse, mut dil_law, mut gauge, mut invariance) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..CASES {
        let a = random_point(n, &mut rng, 3.0);
        let b = random_point(n, &mut rng, 3.0);
        let c = random_point(n, &mut rng, 3.0);
        let lambda = 0.25 + 3.0 * rand::Rng::random::<f64>(&mut rng);
        assoc = assoc.max(coord_gap(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
        let e = hn_hartree::GroupElement::identity(n);
        inverse = inverse.max(coord_gap(&a.mul(&a.inv()), &e)).max(coord_gap(&a.inv().mul(&a), &e));
        dil_law = dil_law.max(coord_gap(&a.mul(&b).dilate(lambda), &a.dilate(lambda).mul(&b.dilate(lambda))));
        let r = koranyi_norm(&a);
        gauge = gauge.max((koranyi_norm(&a.dilate(lambda)) - lambda * r).abs() / (lambda * r).max(1.0));
        let d = distance(&b, &c);
        invariance = invariance.max((distance(&a.mul(&b), &a.mul(&c)) - d).abs() / d.max(1.0));
    }
    out.at_most("associativity", assoc, 1e-12);
    out.at_most("inverse", inverse, 1e-12);
    out.at_most("dilation_automorphism", dil_law, 1e-12);
    out.at_most("gauge_homogeneity", gauge, 1e-12);
    out.at_most("distance_left_invariance", invariance, 1e-10);
}

pub fn cayley(cfg: &RunConfig, out: &mut Checks) {
    let n = cfg.params.n;
    let mut rng = stream(cfg, 2);
    let (mut round, mut unit, mut ident, mut jac) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut round_err = None;
    for k in 0..CASES {
        let a = random_point(n, &mut rng, 3.0);
        let b = random_point(n, &mut rng, 3.0);
        let img = ch::cayley(&a).point;
        unit = unit.max((img.norm_sqr() - 1.0).abs());
        match cayley_inv(&img) {
            Ok(back) => round = round.max(coord_gap(&back, &a)),
            Err(e) => round_err = Some(e),
        }
        let (lhs, rhs) = distance_identity_check(&a, &b);
        ident = ident.max((lhs - rhs).abs() / rhs.max(1e-300));
        if k < 50 {
            let j = jacobian(&a);
            jac = jac.max((jacobian_numeric(&a, 1e-4) - j).abs() / j);
        }
    }
    match round_err {
        Some(e) => {
            out.error("round_trip", e);
        }
        None => {
            out.at_most("round_trip", round, 1e-10);
        }
    }
    out.at_most("image_on_sphere", unit, 1e-12);
    out.at_most("distance_identity", ident, 1e-10);
    out.at_most("jacobian_vs_finite_differences", jac, 1e-6);

    // C_* U is constant on the sphere
    let c = bubble_pushforward_constant(n);
    let unit_bubble = BubbleParams::unit(n);
    let mut push = 0.0f64;
    for _ in 0..200 {
        let z = SpherePoint::sample(n, &mut rng);
        match pushforward(|xi| bubble_value(&unit_bubble, xi), &z) {
            Ok(v) => push = push.max((v / c - 1.0).abs()),
            Err(_) => continue,
        }
    }
    out.at_most("bubble_pushforward_constant", push, 1e-10);
}
