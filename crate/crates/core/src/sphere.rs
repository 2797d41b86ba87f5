//! The CR sphere S^{2n+1} in C^{n+1}: points, uniform sampling, the chordal
//! kernel, low-degree spherical harmonics, Funk-Hecke by Monte Carlo and the
//! energy functional E(F).
//!
//! Real ambient coordinates are ordered (x_1..x_{n+1}, y_1..y_{n+1}) with
//! zeta_d = x_d + i y_d.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use crate::constants::HarmonicIndex;
use crate::cayley::cayley;
use crate::constants::{koranyi_sphere_mass_closed, sphere_volume};
use crate::error::{invalid, HnError, Result};
use crate::hgroup::{gauge_bracket, koranyi_norm};
use crate::jet::Jet2;
use crate::quadrature::mc::{monte_carlo, McStats};
use crate::quadrature::polar::{sample_direction, RadialLaw};
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub zeta: Vec<Complex64>,
}

impl SpherePoint {
    /// Normalizing constructor.
    pub fn new(zeta: Vec<Complex64>) -> Result<Self> {
        if zeta.len() < 2 {
            return invalid("a sphere point needs at least two complex coordinates");
        }
        let norm = zeta.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(Self { zeta: zeta.into_iter().map(|c| c / norm).collect() })
    }

    /// Trusts the caller that the vector already has unit length.
    pub fn from_unit(zeta: Vec<Complex64>) -> Self {
        Self { zeta }
    }

    pub fn from_real(c: &[f64]) -> Result<Self> {
        let m = c.len() / 2;
        Self::new((0..m).map(|d| Complex64::new(c[d], c[m + d])).collect())
    }

    pub fn north(n: usize) -> Self {
        let mut zeta = vec![Complex64::new(0.0, 0.0); n + 1];
        zeta[n] = Complex64::new(1.0, 0.0);
        Self { zeta }
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let zeta: Vec<Complex64> = (0..=n)
                .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect();
            if let Ok(p) = Self::new(zeta) {
                return p;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.zeta.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.zeta.iter().map(|c| c.norm_sqr()).sum()
    }

    /// zeta . conj(other)
    pub fn dot_conj(&self, other: &Self) -> Complex64 {
        self.zeta.iter().zip(&other.zeta).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn real_coords(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.zeta.iter().map(|z| z.re).collect();
        c.extend(self.zeta.iter().map(|z| z.im));
        c
    }
}

/// |1 - zeta . conj(zeta2)|^{-s}.
pub fn chordal_kernel(zeta: &SpherePoint, zeta2: &SpherePoint, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return invalid(format!("kernel exponent must be positive, got {s}"));
    }
    let gap = (Complex64::new(1.0, 0.0) - zeta.dot_conj(zeta2)).norm();
    if gap == 0.0 {
        return Err(HnError::Singular);
    }
    Ok(gap.powf(-s))
}

fn binom(a: u128, b: u128) -> u128 {
    (0..b).fold(1u128, |acc, k| acc * (a - k) / (k + 1))
}

/// Dimension of H_{i,j} on the sphere in C^m.
pub fn sphere_dim(idx: HarmonicIndex, m: usize) -> Result<u128> {
    if m < 2 {
        return invalid(format!("sphere_dim needs m >= 2, got {m}"));
    }
    let (i, j, m) = (idx.i as u128, idx.j as u128, m as u128);
    // (i+j+m-1)(i+m-2)!(j+m-2)! / (i! j! (m-1)! (m-2)!)
    //   = (i+j+m-1)/(m-1) * C(i+m-2, i) * C(j+m-2, j)
    let num = (i + j + m - 1) * binom(i + m - 2, i) * binom(j + m - 2, j);
    Ok(num / (m - 1))
}

/// sqrt(2(n+1)/vol(S^{2n+1})): the constant that makes c Re zeta_d and
/// c Im zeta_d orthonormal.
pub fn harmonic_norm(n: usize) -> f64 {
    (2.0 * (n as f64 + 1.0) / sphere_volume(n)).sqrt()
}

/// sqrt((2n+2) Gamma((2n+1)/2) / (2 pi^{(2n+1)/2})), the constant as printed.
/// It normalizes against |S^{2n}| rather than |S^{2n+1}|, so with it
/// int |Y|^2 = |S^{2n}|/|S^{2n+1}| instead of 1 (pi/2 at n = 1).
pub fn harmonic_norm_display(n: usize) -> f64 {
    let h = n as f64 + 0.5;
    ((2.0 * n as f64 + 2.0).ln() + ln_gamma(h) - 2f64.ln() - h * std::f64::consts::PI.ln())
        .exp()
        .sqrt()
}

fn check_index(d: usize, zeta: &SpherePoint) -> Result<usize> {
    if d == 0 || d > zeta.zeta.len() {
        return invalid(format!("harmonic index d = {d} outside 1..={}", zeta.zeta.len()));
    }
    Ok(d - 1)
}

/// Y_{1,0,d} = c Im zeta_d (1-based d).
pub fn harmonic_10(d: usize, zeta: &SpherePoint) -> Result<f64> {
    let k = check_index(d, zeta)?;
    Ok(harmonic_norm(zeta.n()) * zeta.zeta[k].im)
}

/// Y_{0,1,d} = c Re zeta_d (1-based d).
pub fn harmonic_01(d: usize, zeta: &SpherePoint) -> Result<f64> {
    let k = check_index(d, zeta)?;
    Ok(harmonic_norm(zeta.n()) * zeta.zeta[k].re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereSampler {
    pub seed: u64,
    pub count: usize,
}

impl SphereSampler {
    pub fn new(seed: u64, count: usize) -> Self {
        Self { seed, count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub rejected: u64,
}

impl SphereEstimate {
    fn from_stats(st: &McStats, i: usize, scale: f64) -> Self {
        Self { estimate: scale * st.mean[i], std_error: scale * st.std_error(i), rejected: st.rejected }
    }

    /// |estimate - target| in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target).abs() / self.std_error.max(f64::MIN_POSITIVE)
    }
}

fn check_sampler(sampler: &SphereSampler) -> Result<()> {
    if sampler.count < 2 {
        return invalid("sampler needs at least two samples");
    }
    Ok(())
}

/// Joint Monte Carlo of k integrands from one stream of uniform points;
/// each output is already multiplied by vol(S^{2n+1}).
pub fn sphere_integrate_many<F>(n: usize, k: usize, f: F, sampler: &SphereSampler) -> Result<Vec<SphereEstimate>>
where
    F: Fn(&SpherePoint) -> Option<Vec<f64>> + Sync + Send,
{
    check_sampler(sampler)?;
    let st = monte_carlo(sampler.seed, sampler.count, k, |rng| f(&SpherePoint::sample(n, rng)));
    if st.count < 2 {
        return Err(HnError::Divergent("every sample was rejected".into()));
    }
    let vol = sphere_volume(n);
    Ok((0..k).map(|i| SphereEstimate::from_stats(&st, i, vol)).collect())
}

/// int over S^{2n+1} of f against the unnormalized surface measure.
pub fn sphere_integrate<F>(n: usize, f: F, sampler: &SphereSampler) -> Result<SphereEstimate>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    Ok(sphere_integrate_many(n, 1, |z| Some(vec![f(z)]), sampler)?[0])
}

/// Unitary matrix (as columns) whose last column is zeta.
fn frame(zeta: &SpherePoint) -> Vec<Vec<Complex64>> {
    let m = zeta.zeta.len();
    let skip = (0..m)
        .max_by(|a, b| zeta.zeta[*a].norm().partial_cmp(&zeta.zeta[*b].norm()).unwrap())
        .unwrap();
    let mut basis: Vec<Vec<Complex64>> = vec![zeta.zeta.clone()];
    for d in (0..m).filter(|d| *d != skip) {
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v[d] = Complex64::new(1.0, 0.0);
        for u in &basis {
            // <v, u> = sum v_k conj(u_k)
            let c: Complex64 = v.iter().zip(u).map(|(a, b)| a * b.conj()).sum();
            for (vk, uk) in v.iter_mut().zip(u) {
                *vk -= c * uk;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|c| c / norm).collect());
    }
    basis.rotate_left(1);
    basis
}

/// Importance draw of zeta' for int |1 - zeta.conj(zeta')|^{-s} g(zeta') dzeta'.
///
/// Rotate zeta to the north pole, pull the sphere back through the Cayley
/// map so that the kernel becomes (2 rho^2/<eta>)^{-s} with measure
/// 2^{Q-1} <eta>^{-Q} d eta, and sample the gauge radius from a law with
/// the same behaviour at 0 and infinity. Returns (zeta', weight) with
/// E[weight g(zeta')] equal to the integral.
pub struct KernelDraw {
    n: usize,
    s: f64,
    q: f64,
    law: RadialLaw,
    mass: f64,
}

impl KernelDraw {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        let q = 2.0 * n as f64 + 2.0;
        if !(s > 0.0 && 2.0 * s < q) {
            return invalid(format!("kernel exponent s = {s} must lie in (0, {})", q / 2.0));
        }
        let mu = 2.0 * s;
        Ok(Self { n, s, q, law: RadialLaw::new(q - mu, q - s), mass: koranyi_sphere_mass_closed(n) })
    }

    pub fn draw(&self, zeta: &SpherePoint, rng: &mut ChaCha8Rng) -> (SpherePoint, f64) {
        let r = self.law.sample(rng);
        let eta = sample_direction(self.n, rng).at(r);
        let omega = cayley(&eta).point;
        let cols = frame(zeta);
        let m = self.n + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (w, col) in omega.zeta.iter().zip(&cols) {
            for (o, c) in out.iter_mut().zip(col) {
                *o += w * c;
            }
        }
        let rho = koranyi_norm(&eta);
        let br = gauge_bracket(&eta);
        let w = (self.q - 1.0 - self.s) * 2f64.ln() - 2.0 * self.s * rho.ln() + (self.s - self.q) * br.ln()
            + (self.q - 1.0) * r.ln();
        let weight = w.exp() * self.mass / self.law.pdf(r);
        (SpherePoint::from_unit(out), weight)
    }
}

/// Monte Carlo of int |1 - zeta.conj(zeta')|^{-s} Y(zeta') dzeta' by
/// Cayley-chart importance sampling; s = mu/2 with mu in (0, 2n+2).
pub fn funk_hecke_apply<F>(s: f64, y: F, zeta: &SpherePoint, sampler: &SphereSampler) -> Result<SphereEstimate>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    check_sampler(sampler)?;
    let kd = KernelDraw::new(zeta.n(), s)?;
    let st = monte_carlo(sampler.seed, sampler.count, 1, |rng| {
        let (p, w) = kd.draw(zeta, rng);
        Some(vec![w * y(&p)])
    });
    Ok(SphereEstimate::from_stats(&st, 0, 1.0))
}

/// The same integral with uniform points and diagonal rejection. Finite
/// variance only for s < (n+1)/2.
pub fn funk_hecke_apply_uniform<F>(s: f64, y: F, zeta: &SpherePoint, sampler: &SphereSampler) -> Result<SphereEstimate>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    let n = zeta.n();
    sphere_integrate_many(n, 1, |p| chordal_kernel(zeta, p, s).ok().map(|k| vec![k * y(p)]), sampler).map(|v| v[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientKind {
    /// Ambient gradient minus its normal component.
    Riemannian,
    /// Additionally drops the Reeb direction i zeta.
    Horizontal,
}

/// Ambient jets of the real coordinates at zeta.
pub fn ambient_jets(zeta: &SpherePoint) -> Vec<Jet2> {
    let c = zeta.real_coords();
    let d = c.len();
    c.iter().enumerate().map(|(k, v)| Jet2::variable(*v, k, d)).collect()
}

/// |grad_S F|^2 from an ambient gradient.
pub fn tangential_norm_sqr(grad: &[f64], zeta: &SpherePoint, kind: GradientKind) -> f64 {
    let x = zeta.real_coords();
    let m = x.len() / 2;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let g2 = dot(grad, grad);
    let radial = dot(grad, &x);
    let mut out = g2 - radial * radial;
    if kind == GradientKind::Horizontal {
        // i zeta in real coordinates is (-y, x); it is a unit vector orthogonal to x
        let mut reeb = vec![0.0; 2 * m];
        for d in 0..m {
            reeb[d] = -x[m + d];
            reeb[m + d] = x[d];
        }
        let r = dot(grad, &reeb);
        out -= r * r;
    }
    out.max(0.0)
}

/// Per-point (|grad_S F|^2, F^2) for F given on ambient jets.
fn energy_density<F>(f: &F, zeta: &SpherePoint, kind: GradientKind) -> (f64, f64)
where
    F: Fn(&[Jet2]) -> Jet2,
{
    let j = f(&ambient_jets(zeta));
    (tangential_norm_sqr(&j.grad, zeta, kind), j.value * j.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub gradient: SphereEstimate,
    pub mass: SphereEstimate,
    pub energy: SphereEstimate,
}

/// E(F) = int |grad_S F|^2 + (n^2/2) int F^2, with F a function of the
/// ambient real coordinates supplied on jets.
pub fn sphere_energy<F>(n: usize, f: F, kind: GradientKind, sampler: &SphereSampler) -> Result<EnergyEstimate>
where
    F: Fn(&[Jet2]) -> Jet2 + Sync + Send,
{
    let c = (n * n) as f64 / 2.0;
    let v = sphere_integrate_many(
        n,
        3,
        |z| {
            let (g, m) = energy_density(&f, z, kind);
            Some(vec![g, m, g + c * m])
        },
        sampler,
    )?;
    Ok(EnergyEstimate { gradient: v[0], mass: v[1], energy: v[2] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedEnergyCheck {
    pub kind: GradientKind,
    /// sum_d E(zeta_d F)
    pub lhs: SphereEstimate,
    pub energy: SphereEstimate,
    pub mass: SphereEstimate,
    /// (lhs - E(F)) / int F^2, from a paired estimator.
    pub coefficient: f64,
    pub coefficient_std_error: f64,
    /// The coefficient as printed, n^2/2.
    pub stated_coefficient: f64,
}

/// Compares sum_d E(zeta_d F) with E(F) + c int F^2 and measures c.
/// The identity holds pointwise with c = 2n+1 for the Riemannian gradient
/// and c = 2n for the horizontal one.
pub fn modulated_energy_check<F>(n: usize, f: F, kind: GradientKind, sampler: &SphereSampler) -> Result<ModulatedEnergyCheck>
where
    F: Fn(&[Jet2]) -> Jet2 + Sync + Send,
{
    let c = (n * n) as f64 / 2.0;
    let v = sphere_integrate_many(
        n,
        4,
        |z| {
            let jets = ambient_jets(z);
            let fj = f(&jets);
            let m = n + 1;
            let mut lhs = 0.0;
            for d in 0..m {
                for part in [&jets[d] * &fj, &jets[m + d] * &fj] {
                    lhs += tangential_norm_sqr(&part.grad, z, kind) + c * part.value * part.value;
                }
            }
            let g = tangential_norm_sqr(&fj.grad, z, kind);
            let mass = fj.value * fj.value;
            let e = g + c * mass;
            Some(vec![lhs, e, mass, lhs - e])
        },
        sampler,
    )?;
    let coefficient = v[3].estimate / v[2].estimate;
    Ok(ModulatedEnergyCheck {
        kind,
        lhs: v[0],
        energy: v[1],
        mass: v[2],
        coefficient,
        coefficient_std_error: v[3].std_error / v[2].estimate,
        stated_coefficient: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedKernelCheck {
    pub mu: f64,
    /// int int Re(zeta.conj zeta') F F' |1 - zeta.conj zeta'|^{-mu/2}
    pub weighted: SphereEstimate,
    pub unweighted: SphereEstimate,
    /// (mu/4)/(n+1-mu/4)
    pub ratio: f64,
    /// weighted - ratio * unweighted, paired.
    pub gap: SphereEstimate,
}

/// Double kernel integrals for the weighted inequality; the outer point is
/// uniform and the inner one comes from `KernelDraw`.
pub fn weighted_kernel_check<F>(n: usize, mu: f64, f: F, sampler: &SphereSampler) -> Result<WeightedKernelCheck>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    check_sampler(sampler)?;
    let kd = KernelDraw::new(n, mu / 2.0)?;
    let ratio = (mu / 4.0) / (n as f64 + 1.0 - mu / 4.0);
    let st = monte_carlo(sampler.seed, sampler.count, 3, |rng| {
        let zeta = SpherePoint::sample(n, rng);
        let (p, w) = kd.draw(&zeta, rng);
        let base = w * f(&zeta) * f(&p);
        let re = zeta.dot_conj(&p).re;
        Some(vec![base * re, base, base * (re - ratio)])
    });
    let vol = sphere_volume(n);
    Ok(WeightedKernelCheck {
        mu,
        weighted: SphereEstimate::from_stats(&st, 0, vol),
        unweighted: SphereEstimate::from_stats(&st, 1, vol),
        ratio,
        gap: SphereEstimate::from_stats(&st, 2, vol),
    })
}

#[cfg(test)]
mod tests;
