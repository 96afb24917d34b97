//! Data-parallel fan-out helpers.
//!
//! Restart loops, λ-grids, and verification sweeps are embarrassingly
//! parallel: every work item derives its own RNG stream from the caller's
//! seed, so results do not depend on scheduling. With the `parallel` feature
//! (the default) the loops run on rayon; without it they run sequentially.
//! Reductions are max/ordered-collect, both order-independent, so the two
//! builds produce identical results.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maximum of `f(0..n)`, `−∞` when `n == 0`. Short-circuits on errors.
#[cfg(feature = "parallel")]
pub fn try_max_over<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(f)
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))
}

/// Maximum of `f(0..n)`, `−∞` when `n == 0`. Short-circuits on errors.
#[cfg(not(feature = "parallel"))]
pub fn try_max_over<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        best = best.max(f(i)?);
    }
    Ok(best)
}

/// Collects `f(0..n)` in index order. Short-circuits on errors.
#[cfg(feature = "parallel")]
pub fn try_collect<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Collects `f(0..n)` in index order. Short-circuits on errors.
#[cfg(not(feature = "parallel"))]
pub fn try_collect<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Caps the global worker pool at `n` threads. Effective once per process;
/// later calls (or calls after the pool started) are ignored. No-op in the
/// sequential build.
pub fn init_thread_cap(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}
