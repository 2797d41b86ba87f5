//! Index-parallel map with a sequential fallback.
//!
//! Everything numeric funnels through `map_indexed`, which always returns
//! results in index order. Reductions are then done sequentially over that
//! vector, so sums are bit-identical whatever the worker count.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Route `map_indexed` through the sequential path even when the
/// `parallel` feature is on. Used by the benches.
pub fn force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !FORCE_SEQUENTIAL.load(Ordering::SeqCst) {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Run `op` on a dedicated pool with `threads` workers.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: usize, op: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(op)
}

/// Without the feature there is only one worker.
#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send>(_threads: usize, op: impl FnOnce() -> T + Send) -> T {
    op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, x)| *x == i * i));
    }

    #[test]
    fn pools_agree() {
        let f = || map_indexed(5000, |i| (i as f64).sqrt().sin()).iter().sum::<f64>();
        let a = with_threads(1, f);
        let b = with_threads(3, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
