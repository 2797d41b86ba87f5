//! Closed-form constants: Sobolev and HLS sharp constants, the Lagrange
//! multiplier, the Green coefficient and the Funk-Hecke eigenvalues.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::Params;
use crate::quadrature::rules::gauss_legendre;
use crate::special::{factorial, ln_gamma, sphere_area};

/// Bidegree (i, j) of a spherical harmonic on S^{2n+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub i: usize,
    pub j: usize,
}

impl HarmonicIndex {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// ln E_{i,j}(mu) with no range checks.
pub fn ln_funk(i: usize, j: usize, mu: f64, n: usize) -> f64 {
    let nf = n as f64;
    let a = mu / 4.0;
    (2.0f64).ln() + (nf + 1.0) * PI.ln() + ln_gamma(nf + 1.0 - mu / 2.0) - 2.0 * ln_gamma(a)
        + ln_gamma(i as f64 + a)
        + ln_gamma(j as f64 + a)
        - ln_gamma(i as f64 + nf + 1.0 - a)
        - ln_gamma(j as f64 + nf + 1.0 - a)
}

/// Eigenvalue of the chordal kernel |1 - zeta.conj(zeta')|^{-mu/2} on H_{i,j}.
pub fn funk_coeff(idx: HarmonicIndex, mu: f64, params: &Params) -> Result<f64> {
    let top = 2.0 * (params.n as f64 + 1.0);
    if !(mu > 0.0 && mu < top) {
        return invalid(format!("mu = {mu} outside (0, {top}) for the Funk-Hecke coefficient"));
    }
    Ok(ln_funk(idx.i, idx.j, mu, params.n).exp())
}

/// The second closed form for E_{0,0} at mu = 2n: 8 pi^{n+1} / (n^2 Gamma(n/2)^2).
pub fn e00_at_2n(n: usize) -> f64 {
    let nf = n as f64;
    (8.0f64.ln() + (nf + 1.0) * PI.ln() - 2.0 * nf.ln() - 2.0 * ln_gamma(nf / 2.0)).exp()
}

pub fn c_sobolev(n: usize) -> f64 {
    let nf = n as f64;
    PI * nf * nf / (4f64.powf(nf) * factorial(n as u64)).powf(1.0 / (nf + 1.0))
}

pub fn c_hls(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    let q = 2.0 * nf + 2.0;
    let nfact = factorial(n as u64);
    let base = PI.powf(nf + 1.0) / (2f64.powf(nf - 1.0) * nfact);
    base.powf(mu / q) * (nfact.ln() + ln_gamma((q - mu) / 2.0) - 2.0 * ln_gamma((2.0 * q - mu) / 4.0)).exp()
}

/// The expanded display of C_{H,L}(Q, mu).
pub fn c_hl_display(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    let q = 2.0 * nf + 2.0;
    let p = (2.0 * q - mu) / (q - 2.0);
    let nfact = factorial(n as u64);
    let sob = PI * nf * nf / (4f64.powf(nf) * nfact).powf(1.0 / (nf + 1.0));
    let inner = (PI.powf(nf + 1.0) / (2f64.powf(nf - 1.0) * nfact)).powf(mu / q) * nfact
        * (ln_gamma((q - mu) / 2.0) - 2.0 * ln_gamma((2.0 * q - mu) / 4.0)).exp();
    sob * inner.powf(-1.0 / p)
}

pub fn g_green(n: usize) -> f64 {
    let nf = n as f64;
    let q = 2.0 * nf + 2.0;
    2f64.powf(nf - 2.0) * (2.0 * ln_gamma((q - 2.0) / 4.0)).exp() / PI.powf(q / 2.0)
}

pub fn alpha_with_b(n: usize, mu: f64, b: f64) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    c_sobolev(n).powf(-(q - mu) / 2.0) / c_hls(n, mu) * b.powf((q - mu + 2.0) / 2.0)
}

pub fn sphere_volume(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 + 1.0) / factorial(n as u64)
}

/// Haar measure of the unit Koranyi sphere in gauge-polar form,
/// |S^{2n-1}| * int_0^pi sin^{n-1}(a) da, with the angular integral done by
/// Gauss-Legendre after a = pi sin^2(b).
pub fn koranyi_sphere_mass(n: usize) -> f64 {
    let (x, w) = gauss_legendre(64);
    let nf = n as f64;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let b = (xi + 1.0) * PI / 4.0;
        let a = PI * b.sin().powi(2);
        let da = 2.0 * PI * b.sin() * b.cos() * PI / 4.0;
        s += wi * da * a.sin().powf(nf - 1.0);
    }
    sphere_area(2 * n) * s
}

pub fn koranyi_sphere_mass_closed(n: usize) -> f64 {
    let nf = n as f64;
    sphere_area(2 * n) * PI.sqrt() * (ln_gamma(nf / 2.0) - ln_gamma((nf + 1.0) / 2.0)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub params: Params,
    pub c_sobolev: f64,
    pub c_hls: f64,
    pub c_hl: f64,
    pub alpha: f64,
    pub g_green: f64,
    /// B(Q) as stated (n^2).
    pub b_candidate: f64,
    /// Yamabe constant measured from the PDE residual, when available.
    pub b_measured: Option<f64>,
    pub sphere_volume: f64,
    /// omega_{Q-1}: Haar measure of the unit Koranyi sphere.
    pub omega_q_minus_1: f64,
    /// omega_Q: configuration constant, defaults to omega_{Q-1}.
    pub omega_q: f64,
    pub e00_mu: f64,
    pub e10_mu: f64,
}

pub fn constants_table(params: &Params) -> ConstantsTable {
    let n = params.n;
    let mu = params.mu;
    let b = (n * n) as f64;
    let omega = koranyi_sphere_mass(n);
    ConstantsTable {
        params: *params,
        c_sobolev: c_sobolev(n),
        c_hls: c_hls(n, mu),
        c_hl: c_hl_display(n, mu),
        alpha: alpha_with_b(n, mu, b),
        g_green: g_green(n),
        b_candidate: b,
        b_measured: None,
        sphere_volume: sphere_volume(n),
        omega_q_minus_1: omega,
        omega_q: omega,
        e00_mu: ln_funk(0, 0, mu, n).exp(),
        e10_mu: ln_funk(1, 0, mu, n).exp(),
    }
}

impl ConstantsTable {
    pub fn with_measured_b(mut self, b: f64) -> Self {
        self.b_measured = Some(b);
        self
    }

    pub fn with_omega_q(mut self, omega_q: f64) -> Self {
        self.omega_q = omega_q;
        self
    }

    /// Named entries with the formula each one comes from.
    pub fn provenance(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("c_sobolev", self.c_sobolev, "pi n^2 / (2^{2n} n!)^{1/(n+1)}"),
            ("c_hls", self.c_hls, "(pi^{n+1}/(2^{n-1} n!))^{mu/Q} n! Gamma((Q-mu)/2) / Gamma((2Q-mu)/4)^2"),
            ("c_hl", self.c_hl, "C(Q) C(Q,mu)^{-1/Q*_mu}, expanded"),
            ("alpha", self.alpha, "C(Q)^{-(Q-mu)/2} C(Q,mu)^{-1} B^{(Q-mu+2)/2} with B = n^2"),
            ("g_green", self.g_green, "2^{n-2} Gamma((Q-2)/4)^2 / pi^{Q/2}"),
            ("b_candidate", self.b_candidate, "n^2 as stated"),
            ("sphere_volume", self.sphere_volume, "2 pi^{n+1} / n!"),
            ("omega_q_minus_1", self.omega_q_minus_1, "gauge-polar Koranyi sphere mass, 64-node Gauss-Legendre"),
            ("omega_q", self.omega_q, "configuration constant, default omega_{Q-1}"),
            ("e00_mu", self.e00_mu, "Funk-Hecke coefficient E_{0,0}(mu)"),
            ("e10_mu", self.e10_mu, "Funk-Hecke coefficient E_{1,0}(mu)"),
        ]
    }
}
