//! Mode multipliers of the linearized operator on the sphere and the
//! undetermined-coefficient identity for the Yamabe constant.
//!
//! After the Cayley transport, inverting -Delta_H and the Riesz
//! convolutions act diagonally on H_{i,j}; the linearized equation becomes
//! kappa(i,j) [C_* phi]_{i,j} = [C_* phi]_{i,j} and the kernel is the set of
//! modes with kappa = 1.

use serde::{Deserialize, Serialize};

use crate::bubble::{yamabe_ratio, BubbleParams};
use crate::constants::{alpha_with_b, g_green, ln_funk, HarmonicIndex};
use crate::hgroup::GroupElement;
use crate::params::Params;
use crate::sphere::sphere_dim;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRatio {
    pub idx: HarmonicIndex,
    pub mu: f64,
    pub kappa: f64,
    pub calibrated: bool,
}

fn e(i: usize, j: usize, mu: f64, n: usize) -> f64 {
    ln_funk(i, j, mu, n).exp()
}

/// The bracket E_{i,j}(Q-2) [Q*_mu E_{i,j}(mu) + (Q*_mu - 1) E_{0,0}(mu)].
fn mode_factor(idx: HarmonicIndex, params: &Params) -> f64 {
    let (n, mu, p) = (params.n, params.mu, params.q_star_mu);
    let qm2 = params.qf() - 2.0;
    e(idx.i, idx.j, qm2, n) * (p * e(idx.i, idx.j, mu, n) + (p - 1.0) * e(0, 0, mu, n))
}

/// 2^{(-3Q+mu+2)/2} G(Q) alpha(Q,mu) times the mode factor, alpha with B = n^2.
pub fn kappa_raw(idx: HarmonicIndex, params: &Params) -> f64 {
    let q = params.qf();
    let b = (params.n * params.n) as f64;
    2f64.powf((-3.0 * q + params.mu + 2.0) / 2.0)
        * g_green(params.n)
        * alpha_with_b(params.n, params.mu, b)
        * mode_factor(idx, params)
}

/// The normalization fixed by the bubble itself: U is the (0,0) mode and
/// L(U) = -alpha (2p-2) (I*U^p) U^{p-1}, so kappa(0,0) = 2p - 1. This
/// fixes the constant to 1 / (E_{0,0}(Q-2) E_{0,0}(mu)).
pub fn kappa_derived(idx: HarmonicIndex, params: &Params) -> f64 {
    let n = params.n;
    mode_factor(idx, params) / (e(0, 0, params.qf() - 2.0, n) * e(0, 0, params.mu, n))
}

pub fn mode_multiplier(idx: HarmonicIndex, params: &Params, calibrate: bool) -> SpectralRatio {
    let raw = kappa_raw(idx, params);
    let kappa = if calibrate { raw / kappa_raw(HarmonicIndex::new(1, 0), params) } else { raw };
    SpectralRatio { idx, mu: params.mu, kappa, calibrated: calibrate }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelClassification {
    pub params: Params,
    pub max_degree: usize,
    /// Modes whose calibrated multiplier is 1 within 1e-9.
    pub kernel_modes: Vec<HarmonicIndex>,
    /// Sum of dim H_{i,j} over the kernel modes.
    pub multiplicity: u128,
    pub kappa_00: f64,
    /// Largest calibrated multiplier with i + j >= 2.
    pub max_higher: f64,
    /// kappa(0,0) > kappa(1,0) > kappa(i,j) for i + j >= 2, on raw values.
    pub ordering_holds: bool,
    /// kappa decreasing in i at fixed j and in j at fixed i.
    pub monotone: bool,
    /// Uncalibrated kappa(1,0); 1 if the printed constants were consistent.
    pub raw_kappa_10: f64,
}

pub fn classify_kernel(params: &Params, max_degree: usize) -> KernelClassification {
    let n = params.n;
    let raw10 = kappa_raw(HarmonicIndex::new(1, 0), params);
    let raw00 = kappa_raw(HarmonicIndex::new(0, 0), params);
    let mut kernel_modes = Vec::new();
    let mut max_higher_raw = f64::NEG_INFINITY;
    let mut monotone = true;
    for i in 0..=max_degree {
        for j in 0..=max_degree - i {
            let idx = HarmonicIndex::new(i, j);
            let k = kappa_raw(idx, params);
            if (k / raw10 - 1.0).abs() < 1e-9 {
                kernel_modes.push(idx);
            }
            if i + j >= 2 {
                max_higher_raw = max_higher_raw.max(k);
            }
            if i + j < max_degree {
                monotone &= kappa_raw(HarmonicIndex::new(i + 1, j), params) < k;
                monotone &= kappa_raw(HarmonicIndex::new(i, j + 1), params) < k;
            }
        }
    }
    let multiplicity = kernel_modes.iter().map(|idx| sphere_dim(*idx, n + 1).unwrap_or(0)).sum();
    KernelClassification {
        params: *params,
        max_degree,
        kernel_modes,
        multiplicity,
        kappa_00: raw00 / raw10,
        max_higher: max_higher_raw / raw10,
        ordering_holds: raw00 > raw10 && raw10 > max_higher_raw,
        monotone,
        raw_kappa_10: raw10,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BConstant {
    /// B solving (1/2)^Q ((Q+2)/(Q-2)) G(Q) B E_{1,0}(Q-2) = 1.
    pub b_from_identity: f64,
    /// n^2 as stated.
    pub b_stated: f64,
    /// -Delta_H U / U^{(Q+2)/(Q-2)} from exact jets.
    pub b_direct: f64,
}

impl BConstant {
    pub fn direct_over_stated(&self) -> f64 {
        self.b_direct / self.b_stated
    }

    pub fn identity_over_direct(&self) -> f64 {
        self.b_from_identity / self.b_direct
    }
}

pub fn extract_b_constant(params: &Params) -> BConstant {
    let n = params.n;
    let q = params.qf();
    let lhs_per_b = 0.5f64.powf(q) * (q + 2.0) / (q - 2.0) * g_green(n) * e(1, 0, q - 2.0, n);
    let probe = GroupElement::from_coords(&{
        let mut c = vec![0.0; 2 * n + 1];
        c[0] = 0.37;
        c[2 * n] = -0.21;
        c
    });
    BConstant {
        b_from_identity: 1.0 / lhs_per_b,
        b_stated: (n * n) as f64,
        b_direct: yamabe_ratio(&BubbleParams::unit(n), &probe),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub i: usize,
    pub j: usize,
    pub mu: f64,
    pub kappa_raw: f64,
    pub kappa_calibrated: f64,
}

/// kappa over i + j <= max_degree and mu on a grid of step `mu_step` in (0, Q).
pub fn kappa_table(n: usize, max_degree: usize, mu_step: f64) -> Vec<KappaRow> {
    let q = 2.0 * n as f64 + 2.0;
    let mut rows = Vec::new();
    let mut k = 1;
    loop {
        let mu = k as f64 * mu_step;
        if mu >= q {
            break;
        }
        let params = Params::new(n, mu).expect("mu inside (0, Q)");
        let raw10 = kappa_raw(HarmonicIndex::new(1, 0), &params);
        for i in 0..=max_degree {
            for j in 0..=max_degree - i {
                let raw = kappa_raw(HarmonicIndex::new(i, j), &params);
                rows.push(KappaRow { i, j, mu, kappa_raw: raw, kappa_calibrated: raw / raw10 });
            }
        }
        k += 1;
    }
    rows
}
