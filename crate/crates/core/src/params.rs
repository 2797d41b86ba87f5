use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Complex dimension, homogeneous dimension and the critical exponents
/// derived from them. Every exponent used elsewhere is read from here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub q: usize,
    pub mu: f64,
    pub q_star: f64,
    pub q_star_mu: f64,
}

impl Params {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        let q = 2 * n + 2;
        let qf = q as f64;
        if !(mu > 0.0 && mu < qf) {
            return invalid(format!("mu = {mu} must lie in (0, {q})"));
        }
        Ok(Self {
            n,
            q,
            mu,
            q_star: 2.0 * qf / (qf - 2.0),
            q_star_mu: (2.0 * qf - mu) / (qf - 2.0),
        })
    }

    pub fn qf(&self) -> f64 {
        self.q as f64
    }

    /// Number of real coordinates, 2n+1.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Same n, different mu.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.n, mu)
    }
}
