//! Gauss rules from the Golub-Welsch eigenvalue problem, and the radial
//! rules built on them.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::special::ln_gamma;

type Rule = (Vec<f64>, Vec<f64>);

fn cache() -> &'static Mutex<HashMap<(usize, u64, u64), Rule>> {
    static C: OnceLock<Mutex<HashMap<(usize, u64, u64), Rule>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights for int_{-1}^{1} (1-x)^a (1+x)^b g(x) dx.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Rule {
    assert!(m > 0 && a > -1.0 && b > -1.0, "gauss_jacobi: m={m}, a={a}, b={b}");
    let key = (m, a.to_bits(), b.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = golub_welsch(m, a, b);
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

pub fn gauss_legendre(m: usize) -> Rule {
    gauss_jacobi(m, 0.0, 0.0)
}

fn golub_welsch(m: usize, a: f64, b: f64) -> Rule {
    let ab = a + b;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
    }
    for (idx, o) in off.iter_mut().enumerate() {
        let k = (idx + 1) as f64;
        let s = 2.0 * k + ab;
        *o = if idx == 0 {
            // (k + a + b) cancels against (2k + a + b - 1) when k = 1
            (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
        } else {
            (4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        };
    }
    let mut jm = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        jm[(k, k)] = diag[k];
        if k + 1 < m {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0)).exp();
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    pairs.into_iter().unzip()
}

/// Rule for int_lo^hi g(r) r^p dr (Jacobi weight at lo only when lo = 0).
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl RadialRule {
    /// int_0^R r^p g(r) dr, exact weight r^p.
    pub fn origin(m: usize, p: f64, big_r: f64) -> Self {
        let (x, w) = gauss_jacobi(m, 0.0, p);
        let h = big_r / 2.0;
        Self {
            r: x.iter().map(|x| h * (1.0 + x)).collect(),
            w: w.iter().map(|w| w * h.powf(p + 1.0)).collect(),
        }
    }

    /// int_lo^hi r^p g(r) dr with Gauss-Legendre.
    pub fn interval(m: usize, p: f64, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(m);
        let h = (hi - lo) / 2.0;
        let r: Vec<f64> = x.iter().map(|x| lo + h * (1.0 + x)).collect();
        let w = w.iter().zip(&r).map(|(w, r)| w * h * r.powf(p)).collect();
        Self { r, w }
    }

    /// int_R^inf r^p g(r) dr for g = O(r^{-decay}); the substitution r = R/v
    /// leaves the Jacobi weight v^{decay-p-2} and a smooth remainder.
    pub fn inverted(m: usize, p: f64, decay: f64, big_r: f64) -> Self {
        let c = decay - p - 2.0;
        assert!(c > -1.0, "tail not integrable: decay {decay}, power {p}");
        let (x, w) = gauss_jacobi(m, 0.0, c);
        let scale = 2f64.powf(-c - 1.0);
        let mut r = Vec::with_capacity(m);
        let mut ww = Vec::with_capacity(m);
        for (x, w) in x.iter().zip(&w) {
            let v = (1.0 + x) / 2.0;
            r.push(big_r / v);
            ww.push(w * scale * big_r.powf(p + 1.0) * v.powf(-p - 2.0 - c));
        }
        Self { r, w: ww }
    }

    pub fn concat(parts: Vec<RadialRule>) -> Self {
        let mut r = Vec::new();
        let mut w = Vec::new();
        for p in parts {
            r.extend(p.r);
            w.extend(p.w);
        }
        Self { r, w }
    }

    /// Geometric chain of Legendre intervals covering [lo, hi], ratio <= 2.
    pub fn chain(m: usize, p: f64, lo: f64, hi: f64) -> Self {
        if hi <= lo {
            return Self { r: vec![], w: vec![] };
        }
        let pieces = ((hi / lo).ln() / 2f64.ln()).ceil().max(1.0) as usize;
        let ratio = (hi / lo).powf(1.0 / pieces as f64);
        let parts = (0..pieces)
            .map(|k| Self::interval(m, p, lo * ratio.powi(k as i32), lo * ratio.powi(k as i32 + 1)))
            .collect();
        Self::concat(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for k in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((s - want).abs() < 1e-14, "k={k}: {s}");
        }
    }

    #[test]
    fn jacobi_moments() {
        // int_{-1}^{1} (1+x)^b x^k dx against direct evaluation via Beta functions
        for &b in &[-0.5, 0.0, 0.5, 1.0, 2.5] {
            let (x, w) = gauss_jacobi(12, 0.0, b);
            for k in 0..10 {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 + x).powi(k)).sum();
                let want = 2f64.powf(b + k as f64 + 1.0) / (b + k as f64 + 1.0);
                assert!(((s - want) / want).abs() < 1e-13, "b={b} k={k}");
            }
        }
    }

    #[test]
    fn jacobi_both_ends() {
        let (x, w) = gauss_jacobi(16, -0.5, -0.5);
        // Chebyshev weight: int (1-x^2)^{-1/2} x^2 = pi/2
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - std::f64::consts::PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn radial_rules() {
        let o = RadialRule::origin(20, 1.5, 2.0);
        let s: f64 = o.r.iter().zip(&o.w).map(|(r, w)| w * r * r).sum();
        let want = 2f64.powf(4.5) / 4.5;
        assert!(((s - want) / want).abs() < 1e-13);
        // int_1^inf r^3 (1+r^2)^{-4} dr = 1/48 + ... compare with chain + tail
        let g = |r: f64| (1.0 + r * r).powi(-4);
        let tail = RadialRule::inverted(30, 3.0, 8.0, 1.0);
        let s: f64 = tail.r.iter().zip(&tail.w).map(|(r, w)| w * g(*r)).sum();
        // exact: with u = 1+r^2, int_2^inf (u-1)/2 u^{-4} du = 1/2 (1/(2*4) - 1/(3*8))
        let want = 0.5 * (1.0 / 8.0 - 1.0 / 24.0);
        assert!(((s - want) / want).abs() < 1e-12, "{s} vs {want}");
        let ch = RadialRule::chain(16, 3.0, 0.5, 7.0);
        let s: f64 = ch.r.iter().zip(&ch.w).map(|(r, w)| w * r).sum();
        let want = (7f64.powi(5) - 0.5f64.powi(5)) / 5.0;
        assert!(((s - want) / want).abs() < 1e-13);
    }
}
