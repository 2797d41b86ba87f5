//! Gauge-polar coordinates on H^n.
//!
//! A point at gauge radius r in direction (a, w), a in [0, pi] and w on
//! S^{2n-1}, is z = r sin(a)^{1/2} w, t = r^2 cos(a). Haar measure becomes
//! r^{Q-1} dr sin(a)^{n-1} da dw. The angle a is reparametrised as
//! a = pi sin^2(b) so that sin(a)^{1/2} is smooth in b at both ends.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::hgroup::GroupElement;
use crate::quadrature::rules::gauss_legendre;

#[derive(Debug, Clone)]
pub struct Direction {
    pub uz: Vec<Complex64>,
    pub ut: f64,
}

impl Direction {
    pub fn at(&self, r: f64) -> GroupElement {
        GroupElement { z: self.uz.iter().map(|c| c * r).collect(), t: r * r * self.ut }
    }

    fn from_angle(a: f64, w: &[Complex64]) -> Self {
        let s = a.sin().max(0.0).sqrt();
        Self { uz: w.iter().map(|c| c * s).collect(), ut: a.cos() }
    }
}

/// Tensor rule on the unit Koranyi sphere; weights sum to its Haar mass.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub dirs: Vec<Direction>,
    pub weights: Vec<f64>,
}

impl AngularRule {
    pub fn new(n: usize, nodes: usize) -> Self {
        let (xb, wb) = gauss_legendre(nodes);
        let sphere = sphere_rule(n, nodes);
        let mut dirs = Vec::with_capacity(nodes * sphere.len());
        let mut weights = Vec::with_capacity(nodes * sphere.len());
        for (x, w) in xb.iter().zip(&wb) {
            let b = (x + 1.0) * PI / 4.0;
            let a = PI * b.sin().powi(2);
            let wa = w * (PI / 4.0) * 2.0 * PI * b.sin() * b.cos() * a.sin().powi(n as i32 - 1);
            for (om, wo) in &sphere {
                dirs.push(Direction::from_angle(a, om));
                weights.push(wa * wo);
            }
        }
        Self { dirs, weights }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// Shared, lazily built angular rules keyed by (n, nodes).
pub fn angular_rule(n: usize, nodes: usize) -> Arc<AngularRule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<AngularRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(n, nodes)) {
        return r.clone();
    }
    let rule = Arc::new(AngularRule::new(n, nodes));
    cache.lock().unwrap().insert((n, nodes), rule.clone());
    rule
}

/// Rule on S^{2n-1} in C^n: moduli on the positive orthant of S^{n-1}
/// (hyperspherical angles, Gauss-Legendre) times trapezoid phases.
pub fn sphere_rule(n: usize, nodes: usize) -> Vec<(Vec<Complex64>, f64)> {
    // moduli rule: list of (m, weight) with weight including m_1...m_n
    let (xg, wg) = gauss_legendre(nodes);
    // build recursively: remaining "radius" factor carried in the last slot
    let mut partial: Vec<(Vec<f64>, f64, f64)> = vec![(vec![], 1.0, 1.0)];
    for k in 0..n.saturating_sub(1) {
        let dim_left = n - k; // number of moduli still to assign
        let mut next = Vec::new();
        for (ms, w, rad) in &partial {
            for (x, wx) in xg.iter().zip(&wg) {
                let g = (x + 1.0) * PI / 4.0;
                let wgt = wx * PI / 4.0 * g.sin().powi(dim_left as i32 - 2);
                let mut m = ms.clone();
                m.push(rad * g.cos());
                next.push((m, w * wgt, rad * g.sin()));
            }
        }
        partial = next;
    }
    let moduli: Vec<(Vec<f64>, f64)> = partial
        .into_iter()
        .map(|(mut m, w, rad)| {
            m.push(rad);
            let prod: f64 = m.iter().product();
            (m, w * prod)
        })
        .collect();
    // phases
    let np = nodes;
    let dphi = 2.0 * PI / np as f64;
    let mut out = Vec::new();
    for (m, w) in &moduli {
        let total = np.pow(n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut z = Vec::with_capacity(n);
            for mk in m {
                let phi = (rest % np) as f64 * dphi;
                rest /= np;
                z.push(Complex64::from_polar(*mk, phi));
            }
            out.push((z, w * dphi.powi(n as i32)));
        }
    }
    out
}

/// Uniform direction with respect to the gauge-polar angular measure.
pub fn sample_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Direction {
    let a = if n == 1 {
        rng.random::<f64>() * PI
    } else {
        let h = n as f64 / 2.0;
        let b: f64 = Beta::new(h, h).unwrap().sample(rng);
        (1.0 - 2.0 * b).clamp(-1.0, 1.0).acos()
    };
    let mut w: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut w {
        *c /= norm;
    }
    Direction::from_angle(a, &w)
}

/// Radial law with density 2 r^{a-1} (1+r^2)^{-b} / B(a/2, b-a/2) on (0, inf),
/// sampled through u = r^2/(1+r^2) ~ Beta(a/2, b - a/2).
#[derive(Debug, Clone)]
pub struct RadialLaw {
    pub a: f64,
    pub b: f64,
    ln_norm: f64,
    dist: Beta<f64>,
}

impl RadialLaw {
    pub fn new(a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b > a / 2.0, "radial law needs a > 0, b > a/2 (a={a}, b={b})");
        let ln_beta = crate::special::ln_gamma(a / 2.0) + crate::special::ln_gamma(b - a / 2.0)
            - crate::special::ln_gamma(b);
        let dist = Beta::new(a / 2.0, b - a / 2.0).unwrap();
        Self { a, b, ln_norm: 2f64.ln() - ln_beta, dist }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = self.dist.sample(rng);
        let u = u.min(1.0 - 1e-16);
        (u / (1.0 - u)).sqrt()
    }

    pub fn pdf(&self, r: f64) -> f64 {
        (self.ln_norm + (self.a - 1.0) * r.ln() - self.b * (1.0 + r * r).ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::koranyi_sphere_mass_closed;
    use crate::special::sphere_area;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_rule_masses() {
        for n in 1..4 {
            let r = sphere_rule(n, 12);
            let m: f64 = r.iter().map(|p| p.1).sum();
            assert!(((m - sphere_area(2 * n)) / m).abs() < 1e-12, "n={n}");
            for (z, _) in &r {
                let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn second_moments_on_sphere() {
        // int |w_1|^2 dw = |S^{2n-1}| / n
        for n in 1..4 {
            let r = sphere_rule(n, 12);
            let m: f64 = r.iter().map(|p| p.1 * p.0[0].norm_sqr()).sum();
            let want = sphere_area(2 * n) / n as f64;
            assert!(((m - want) / want).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn angular_rule_mass() {
        for n in 1..3 {
            // the polar-angle rule converges like 1e-4, 1e-9, 1e-13 at 6, 12, 16 nodes (n = 2)
            let r = AngularRule::new(n, 20);
            let want = koranyi_sphere_mass_closed(n);
            assert!(((r.mass() - want) / want).abs() < 1e-12, "n={n}");
            for d in &r.dirs {
                let g = crate::hgroup::koranyi_norm(&d.at(2.5));
                assert!((g - 2.5).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn radial_law_normalised() {
        let law = RadialLaw::new(2.0, 2.5);
        let rule = crate::quadrature::rules::RadialRule::concat(vec![
            crate::quadrature::rules::RadialRule::origin(40, 0.0, 1.0),
            crate::quadrature::rules::RadialRule::inverted(40, 0.0, 4.0, 1.0),
        ]);
        let s: f64 = rule.r.iter().zip(&rule.w).map(|(r, w)| w * law.pdf(*r)).sum();
        assert!((s - 1.0).abs() < 1e-10, "{s}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean: f64 = (0..20000).map(|_| (law.sample(&mut rng) < 1.0) as u8 as f64).sum::<f64>() / 20000.0;
        let want: f64 = rule.r.iter().zip(&rule.w).filter(|(r, _)| **r < 1.0).map(|(r, w)| w * law.pdf(*r)).sum();
        assert!((mean - want).abs() < 0.015, "{mean} vs {want}");
    }
}
