//! Integration over H^n: product Gauss rules in gauge-polar coordinates and
//! importance-sampled Monte Carlo. Both are deterministic for a fixed spec.
//!
//! Decay exponents are always in gauge units: `decay = theta` means
//! |f(xi)| <= C rho(xi)^{-theta} at infinity.

pub mod mc;
pub mod polar;
pub mod rules;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::koranyi_sphere_mass_closed;
use crate::error::{invalid, HnError, Result};
use crate::hgroup::{gauge_bracket, koranyi_norm, GroupElement};
use crate::parallel::map_indexed;
use polar::{angular_rule, sample_direction, AngularRule, RadialLaw};
use rules::RadialRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Gauss rules in (r, angle, phase); the config name is kept from the
    /// original cylindrical layout.
    #[serde(rename = "tensor_cylindrical", alias = "tensor")]
    Tensor,
    #[serde(rename = "monte_carlo")]
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub method: Method,
    pub seed: u64,
    pub samples: usize,
    pub truncation_radius: f64,
    pub near_field_radius: f64,
    /// Gauss nodes per radial piece.
    pub radial_nodes: usize,
    /// Nodes per angular coordinate; an S^{2n-1} rule has nodes^{2n-1} points.
    pub angular_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: Method::Tensor,
            seed: 20_240_601,
            samples: 1_000_000,
            truncation_radius: 50.0,
            near_field_radius: 1.0,
            radial_nodes: 64,
            angular_nodes: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn monte_carlo(seed: u64, samples: usize) -> Self {
        Self { method: Method::MonteCarlo, seed, samples, ..Self::default() }
    }

    pub fn tensor(radial_nodes: usize, angular_nodes: usize) -> Self {
        Self { radial_nodes, angular_nodes, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_field_radius > 0.0 && self.near_field_radius < self.truncation_radius) {
            return invalid(format!(
                "need 0 < near_field_radius ({}) < truncation_radius ({})",
                self.near_field_radius, self.truncation_radius
            ));
        }
        if self.samples == 0 {
            return invalid("samples must be positive");
        }
        if self.radial_nodes < 2 || self.angular_nodes < 2 {
            return invalid("node counts must be at least 2");
        }
        Ok(())
    }

    /// Quarter-resolution copy for the inner integral of a nested rule.
    pub fn coarse(&self) -> Self {
        Self {
            radial_nodes: (self.radial_nodes / 4).max(8),
            angular_nodes: (self.angular_nodes / 4).max(8),
            ..self.clone()
        }
    }

    fn angular(&self, n: usize) -> std::sync::Arc<AngularRule> {
        angular_rule(n, self.angular_nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Zero for tensor rules.
    pub std_error: f64,
    /// Power-law bound on the mass beyond the truncation radius. The tail is
    /// integrated (not cut), so this is informative only.
    pub tail_bound: f64,
}

impl IntegralEstimate {
    pub fn zero() -> Self {
        Self { value: 0.0, std_error: 0.0, tail_bound: 0.0 }
    }

    fn from_stats(st: &mc::McStats, i: usize, tail_bound: f64) -> Self {
        Self { value: st.mean[i], std_error: st.std_error(i), tail_bound }
    }
}

/// Smooth cutoff: 1 on [0, 1], 0 on [2, inf).
pub fn cutoff(s: f64) -> f64 {
    fn h(x: f64) -> f64 {
        if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() }
    }
    let a = h(2.0 - s);
    let b = h(s - 1.0);
    a / (a + b)
}

/// sum over radial nodes and directions of w g(eta, r), eta = center . (r dir).
fn polar_sum<G>(rad: &RadialRule, ang: &AngularRule, center: Option<&GroupElement>, g: G) -> f64
where
    G: Fn(&GroupElement, f64) -> f64 + Sync,
{
    let parts = map_indexed(rad.r.len(), |k| {
        let r = rad.r[k];
        let mut s = 0.0;
        for (d, w) in ang.dirs.iter().zip(&ang.weights) {
            let p = d.at(r);
            let v = match center {
                Some(c) => g(&c.mul(&p), r),
                None => g(&p, r),
            };
            s += w * v;
        }
        rad.w[k] * s
    });
    parts.iter().sum()
}

/// |Sigma| max|f(R dir)| R^{Q-mu} / (decay + mu - Q), the power-law mass
/// of f d^{-mu} beyond gauge radius R.
fn tail_estimate<F>(n: usize, f: &F, decay: f64, mu: f64, big_r: f64) -> f64
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    let q = 2.0 * n as f64 + 2.0;
    let ang = angular_rule(n, if n <= 2 { 8 } else { 4 });
    let m = ang.dirs.iter().map(|d| f(&d.at(big_r)).abs()).fold(0.0, f64::max);
    koranyi_sphere_mass_closed(n) * m * big_r.powf(q - mu) / (decay + mu - q)
}

fn check_decay(decay: f64, bound: f64) -> Result<()> {
    if decay > bound {
        Ok(())
    } else {
        Err(HnError::NonIntegrable { decay, bound })
    }
}

/// Integral of f over H^n against Haar measure.
pub fn integrate_hn<F>(n: usize, f: F, decay: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    spec.validate()?;
    let q = 2.0 * n as f64 + 2.0;
    check_decay(decay, q)?;
    let tail = tail_estimate(n, &f, decay, 0.0, spec.truncation_radius);
    match spec.method {
        Method::Tensor => {
            let m = spec.radial_nodes;
            let (r0, r1) = (spec.near_field_radius, spec.truncation_radius);
            let rad = RadialRule::concat(vec![
                RadialRule::origin(m, q - 1.0, r0),
                RadialRule::chain(m, q - 1.0, r0, r1),
                RadialRule::inverted(m, q - 1.0, decay, r1),
            ]);
            let value = polar_sum(&rad, &spec.angular(n), None, |eta, _| f(eta));
            Ok(IntegralEstimate { value, std_error: 0.0, tail_bound: tail })
        }
        Method::MonteCarlo => {
            let law = RadialLaw::new(q, decay / 2.0);
            let mass = koranyi_sphere_mass_closed(n);
            let st = mc::monte_carlo(spec.seed, spec.samples, 1, |rng| {
                let r = law.sample(rng);
                let eta = sample_direction(n, rng).at(r);
                Some(vec![f(&eta) * r.powf(q - 1.0) * mass / law.pdf(r)])
            });
            Ok(IntegralEstimate::from_stats(&st, 0, tail))
        }
    }
}

/// Integral over H^n of a function of (|z|^2, t) only. Needs just the
/// radial and polar-angle rules, so it is cheap for any n.
pub fn integrate_zonal<F>(n: usize, f: F, decay: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    spec.validate()?;
    let nf = n as f64;
    let q = 2.0 * nf + 2.0;
    check_decay(decay, q)?;
    let m = spec.radial_nodes;
    let (r0, r1) = (spec.near_field_radius, spec.truncation_radius);
    let rad = RadialRule::concat(vec![
        RadialRule::origin(m, q - 1.0, r0),
        RadialRule::chain(m, q - 1.0, r0, r1),
        RadialRule::inverted(m, q - 1.0, decay, r1),
    ]);
    let (xb, wb) = rules::gauss_legendre(spec.angular_nodes.max(16));
    let angles: Vec<(f64, f64, f64)> = xb
        .iter()
        .zip(&wb)
        .map(|(x, w)| {
            let b = (x + 1.0) * std::f64::consts::PI / 4.0;
            let a = std::f64::consts::PI * b.sin().powi(2);
            let wa = w * std::f64::consts::PI.powi(2) / 2.0 * b.sin() * b.cos() * a.sin().powf(nf - 1.0);
            (a.sin(), a.cos(), wa)
        })
        .collect();
    let sphere = crate::special::sphere_area(2 * n);
    let parts = map_indexed(rad.r.len(), |k| {
        let r = rad.r[k];
        let s: f64 = angles.iter().map(|&(sa, ca, wa)| wa * f(r * r * sa, r * r * ca)).sum();
        rad.w[k] * s
    });
    let value = sphere * parts.iter().sum::<f64>();
    let big_r = r1;
    let edge = angles.iter().map(|&(sa, ca, _)| f(big_r * big_r * sa, big_r * big_r * ca).abs()).fold(0.0, f64::max);
    let tail = koranyi_sphere_mass_closed(n) * edge * big_r.powf(q) / (decay - q);
    Ok(IntegralEstimate { value, std_error: 0.0, tail_bound: tail })
}

/// Riesz potential int f(eta) d(xi, eta)^{-mu} d eta.
///
/// Tensor path: a chart centred at xi carries the kernel singularity
/// (Jacobi weight r^{Q-1-mu}) on r < 2 rc, and a chart at the origin carries
/// the rest, joined by the cutoff in d(xi, eta)/rc with rc = max(R_near,
/// rho(xi)/3).
pub fn riesz_potential<F>(
    f: F,
    mu: f64,
    xi: &GroupElement,
    decay: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    spec.validate()?;
    let n = xi.n();
    let q = 2.0 * n as f64 + 2.0;
    if !(mu > 0.0 && mu < q) {
        return invalid(format!("mu = {mu} outside (0, {q})"));
    }
    check_decay(decay + mu, q)?;
    let tail = tail_estimate(n, &f, decay, mu, spec.truncation_radius.max(2.0 * koranyi_norm(xi)));
    match spec.method {
        Method::Tensor => {
            let m = spec.radial_nodes;
            let ang = spec.angular(n);
            let rho = koranyi_norm(xi);
            let rc = spec.near_field_radius.max(rho / 3.0);
            let near = RadialRule::origin(m, q - 1.0 - mu, 2.0 * rc);
            let a = polar_sum(&near, &ang, Some(xi), |eta, r| f(eta) * cutoff(r / rc));
            let rn = spec.near_field_radius;
            let rf = 4.0 * rho.max(rn);
            let far = RadialRule::concat(vec![
                RadialRule::origin(m, q - 1.0, rn),
                RadialRule::chain(m, q - 1.0, rn, rf),
                RadialRule::inverted(m, q - 1.0, decay + mu, rf),
            ]);
            let xinv = xi.inv();
            let b = polar_sum(&far, &ang, None, |eta, _| {
                let d = koranyi_norm(&xinv.mul(eta));
                let keep = 1.0 - cutoff(d / rc);
                if keep == 0.0 { 0.0 } else { keep * f(eta) * d.powf(-mu) }
            });
            Ok(IntegralEstimate { value: a + b, std_error: 0.0, tail_bound: tail })
        }
        Method::MonteCarlo => {
            let sampler = KernelSampler::new(n, mu, decay);
            let st = mc::monte_carlo(spec.seed, spec.samples, 1, |rng| Some(vec![sampler.draw(&f, xi, rng)]));
            Ok(IntegralEstimate::from_stats(&st, 0, tail))
        }
    }
}

/// Importance sampler for int f(eta) d(xi, eta)^{-s} d eta.
///
/// Draws eta from an even mixture of a law centred at xi (radial density
/// ~ r^{Q-s-1}, which cancels the kernel singularity) and a law centred at
/// the origin (where f lives). Weighting by the mixture density keeps the
/// weight bounded wherever either component covers the integrand, so
/// far-out xi do not blow up the variance.
pub struct KernelSampler {
    n: usize,
    q: f64,
    s: f64,
    mass: f64,
    near: RadialLaw,
    origin: RadialLaw,
}

impl KernelSampler {
    /// `decay` is the gauge decay exponent of f.
    pub fn new(n: usize, s: f64, decay: f64) -> Self {
        let q = 2.0 * n as f64 + 2.0;
        Self {
            n,
            q,
            s,
            mass: koranyi_sphere_mass_closed(n),
            near: RadialLaw::new(q - s, decay / 2.0),
            origin: RadialLaw::new(q, decay.max(q + 0.5) / 2.0),
        }
    }

    fn density(&self, law: &RadialLaw, r: f64) -> f64 {
        let r = r.max(1e-300);
        law.pdf(r) / (self.mass * r.powf(self.q - 1.0))
    }

    pub fn draw<F, R>(&self, f: &F, xi: &GroupElement, rng: &mut R) -> f64
    where
        F: Fn(&GroupElement) -> f64,
        R: Rng + ?Sized,
    {
        let eta = if rng.random::<bool>() {
            let r = self.near.sample(rng);
            xi.mul(&sample_direction(self.n, rng).at(r))
        } else {
            let r = self.origin.sample(rng);
            sample_direction(self.n, rng).at(r)
        };
        let d = koranyi_norm(&xi.inv().mul(&eta));
        let mix = 0.5 * self.density(&self.near, d) + 0.5 * self.density(&self.origin, koranyi_norm(&eta));
        let fv = f(&eta);
        if fv == 0.0 {
            0.0
        } else {
            fv * d.powf(-self.s) / mix
        }
    }
}

/// Double Hartree integral I(f, g) = int int f(xi) g(eta) d(xi, eta)^{-mu}.
///
/// Monte Carlo draws xi and one kernel-weighted eta per sample. The tensor
/// path nests a coarse Riesz rule inside the outer rule.
pub fn hartree_energy<F, G>(
    n: usize,
    f: F,
    g: G,
    mu: f64,
    decay_f: f64,
    decay_g: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&GroupElement) -> f64 + Sync,
    G: Fn(&GroupElement) -> f64 + Sync,
{
    spec.validate()?;
    let q = 2.0 * n as f64 + 2.0;
    if !(mu > 0.0 && mu < q) {
        return invalid(format!("mu = {mu} outside (0, {q})"));
    }
    check_decay(decay_f, q)?;
    check_decay(decay_g + mu, q)?;
    match spec.method {
        Method::Tensor => {
            let inner = spec.coarse();
            let outer = spec.coarse();
            let err = std::sync::Mutex::new(None);
            let est = integrate_hn(
                n,
                |xi| {
                    let fx = f(xi);
                    if fx == 0.0 {
                        return 0.0;
                    }
                    match riesz_potential(&g, mu, xi, decay_g, &inner) {
                        Ok(v) => fx * v.value,
                        Err(e) => {
                            *err.lock().unwrap() = Some(e);
                            f64::NAN
                        }
                    }
                },
                decay_f,
                &outer,
            )?;
            if let Some(e) = err.into_inner().unwrap() {
                return Err(e);
            }
            Ok(est)
        }
        Method::MonteCarlo => {
            let outer = RadialLaw::new(q, decay_f / 2.0);
            let inner = KernelSampler::new(n, mu, decay_g);
            let mass = koranyi_sphere_mass_closed(n);
            let st = mc::monte_carlo(spec.seed, spec.samples, 1, |rng| {
                let r = outer.sample(rng);
                let xi = sample_direction(n, rng).at(r);
                let fx = f(&xi);
                let wx = fx * r.powf(q - 1.0) * mass / outer.pdf(r);
                if wx == 0.0 {
                    return Some(vec![0.0]);
                }
                Some(vec![wx * inner.draw(&g, &xi, rng)])
            });
            Ok(IntegralEstimate::from_stats(&st, 0, 0.0))
        }
    }
}

/// Full Hartree energy against the squared half-kernel potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfKernelCheck {
    pub full: IntegralEstimate,
    /// int (k * f)^2 with k = rho^{-(Q+mu)/2}.
    pub half: IntegralEstimate,
    pub ratio: f64,
    pub ratio_std_error: f64,
}

const HALF_DRAWS: usize = 8;

/// Compare I(f, f) with the L^2 norm of f convolved with the half kernel.
/// Monte Carlo only: the half side squares the inner potential with the
/// U-statistic over several independent inner draws, which is unbiased.
pub fn half_kernel_factorization<F>(n: usize, f: F, mu: f64, decay: f64, spec: &QuadratureSpec) -> Result<HalfKernelCheck>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    spec.validate()?;
    let q = 2.0 * n as f64 + 2.0;
    let s = (q + mu) / 2.0;
    let mc_spec = QuadratureSpec { method: Method::MonteCarlo, ..spec.clone() };
    let full = hartree_energy(n, &f, &f, mu, decay, decay, &mc_spec)?;
    let outer = RadialLaw::new(q, (q + mu) / 2.0);
    let inner = KernelSampler::new(n, s, decay);
    let mass = koranyi_sphere_mass_closed(n);
    let st = mc::monte_carlo(spec.seed ^ 0x9e37_79b9_7f4a_7c15, spec.samples, 1, |rng| {
        let r = outer.sample(rng);
        let xi = sample_direction(n, rng).at(r);
        let w = r.powf(q - 1.0) * mass / outer.pdf(r);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..HALF_DRAWS {
            let a = inner.draw(&f, &xi, rng);
            s1 += a;
            s2 += a * a;
        }
        let k = HALF_DRAWS as f64;
        Some(vec![w * (s1 * s1 - s2) / (k * (k - 1.0))])
    });
    let half = IntegralEstimate::from_stats(&st, 0, 0.0);
    let ratio = full.value / half.value;
    let rel = ((full.std_error / full.value).powi(2) + (half.std_error / half.value).powi(2)).sqrt();
    Ok(HalfKernelCheck { full, half, ratio, ratio_std_error: ratio.abs() * rel })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub mu: f64,
    pub theta: f64,
    pub regime: Regime,
    pub fitted: f64,
    pub predicted: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Decay of int d(xi, eta)^{-mu} <eta>^{-theta/2} d eta in rho(xi).
///
/// Off the critical line the slope is a least-squares fit at rho = 10, 30,
/// 100. At theta = Q the potential behaves like rho^{-mu} ln rho, so the
/// model R^p (A ln R + B) is fitted on seven log-spaced radii instead.
pub fn decay_regime_check(n: usize, mu: f64, theta: f64, spec: &QuadratureSpec) -> Result<DecayFit> {
    let q = 2.0 * n as f64 + 2.0;
    if !(mu > 0.0 && mu < q) {
        return invalid(format!("mu = {mu} outside (0, {q})"));
    }
    check_decay(theta + mu, q)?;
    let (regime, predicted) = if (theta - q).abs() < 1e-12 {
        (Regime::Critical, -mu)
    } else if theta < q {
        (Regime::Subcritical, q - mu - theta)
    } else {
        (Regime::Supercritical, -mu)
    };
    let radii: Vec<f64> = match regime {
        Regime::Critical => (0..7).map(|k| 10f64.powf(1.0 + k as f64 / 6.0)).collect(),
        _ => vec![10.0, 30.0, 100.0],
    };
    let weight = |eta: &GroupElement| gauge_bracket(eta).powf(-theta / 2.0);
    let mut values = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut xi = GroupElement::identity(n);
        xi.z[0].re = r;
        values.push(riesz_potential(weight, mu, &xi, theta, spec)?.value);
    }
    let fitted = match regime {
        Regime::Critical => fit_log_model(&radii, &values, predicted),
        _ => {
            let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
            ls_line(&xs, &ys).0
        }
    };
    Ok(DecayFit { mu, theta, regime, fitted, predicted, radii, values })
}

/// Slope and intercept of the least-squares line.
pub fn ls_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Relative misfit of I = R^p (A ln R + B) with A, B by weighted least
/// squares, minimised over p near `guess`.
fn fit_log_model(radii: &[f64], values: &[f64], guess: f64) -> f64 {
    let misfit = |p: f64| {
        // rows: (ln R, 1) / y, target 1, with y = I R^{-p}
        let rows: Vec<(f64, f64)> = radii
            .iter()
            .zip(values)
            .map(|(r, v)| {
                let y = v * r.powf(-p);
                (r.ln() / y, 1.0 / y)
            })
            .collect();
        let (mut saa, mut sab, mut sbb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(a, b) in &rows {
            saa += a * a;
            sab += a * b;
            sbb += b * b;
            sa += a;
            sb += b;
        }
        let det = saa * sbb - sab * sab;
        let ca = (sa * sbb - sb * sab) / det;
        let cb = (saa * sb - sab * sa) / det;
        rows.iter().map(|&(a, b)| (ca * a + cb * b - 1.0).powi(2)).sum::<f64>()
    };
    let mut best = guess;
    let mut best_val = f64::INFINITY;
    let steps = 2000;
    for k in 0..=steps {
        let p = guess - 1.0 + 2.0 * k as f64 / steps as f64;
        let v = misfit(p);
        if v < best_val {
            best_val = v;
            best = p;
        }
    }
    golden_min(misfit, best - 1e-3, best + 1e-3, 1e-10)
}

/// Golden-section minimisation on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Draw a point uniformly from the Koranyi ball of radius delta about the
/// origin: r = delta u^{1/Q}.
pub fn sample_ball<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> GroupElement {
    let q = 2.0 * n as f64 + 2.0;
    let u: f64 = rng.random();
    sample_direction(n, rng).at(delta * u.powf(1.0 / q))
}

#[cfg(test)]
mod tests;
