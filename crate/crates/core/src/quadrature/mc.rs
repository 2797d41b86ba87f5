//! Seeded Monte Carlo with a fixed chunk layout.
//!
//! Chunk k draws from ChaCha8 stream k of the run seed. Chunks are merged
//! in index order, so the estimate depends on (seed, samples) only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::parallel::map_indexed;

pub const CHUNK: usize = 4096;

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Running mean and centred second moment of K simultaneous estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct McStats {
    pub count: u64,
    pub rejected: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl McStats {
    pub fn new(k: usize) -> Self {
        Self { count: 0, rejected: 0, mean: vec![0.0; k], m2: vec![0.0; k] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for (i, &v) in x.iter().enumerate() {
            let d = v - self.mean[i];
            self.mean[i] += d / c;
            self.m2[i] += d * (v - self.mean[i]);
        }
    }

    pub fn merge(&mut self, o: &McStats) {
        self.rejected += o.rejected;
        if o.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, o.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = o.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += o.m2[i] + d * d * na * nb / n;
        }
        self.count += o.count;
    }

    pub fn std_error(&self, i: usize) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let c = self.count as f64;
        (self.m2[i] / (c - 1.0) / c).sqrt()
    }
}

/// Draw `samples` vectors of length k; `None` or non-finite entries reject
/// the whole draw.
pub fn monte_carlo<F>(seed: u64, samples: usize, k: usize, draw: F) -> McStats
where
    F: Fn(&mut ChaCha8Rng) -> Option<Vec<f64>> + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = map_indexed(chunks, |c| {
        let mut rng = chunk_rng(seed, c);
        let len = CHUNK.min(samples - c * CHUNK);
        let mut st = McStats::new(k);
        for _ in 0..len {
            match draw(&mut rng) {
                Some(v) if v.iter().all(|x| x.is_finite()) => st.push(&v),
                _ => st.rejected += 1,
            }
        }
        st
    });
    let mut total = McStats::new(k);
    for p in &parts {
        total.merge(p);
    }
    total
}
