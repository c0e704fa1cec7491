//! Worker pool shared by the Monte Carlo harnesses.
//!
//! When `LAB_THREADS` is set, a dedicated pool of that size is used;
//! otherwise work runs on the ambient rayon pool (so callers and tests can
//! install pools of any size). Results must never depend on the pool size:
//! replicates get their own derived random streams and aggregation happens in
//! replicate order via pairwise reduction.

use rayon::prelude::*;
use std::sync::OnceLock;

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Worker count requested via `LAB_THREADS`, if any.
pub fn configured_threads() -> Option<usize> {
    std::env::var("LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0)
}

/// The dedicated pool, created on first use with the `LAB_THREADS` size.
pub fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(configured_threads().unwrap_or(0))
            .build()
            .expect("thread pool")
    })
}

/// Run `f` on the `LAB_THREADS` pool when configured, else inline (ambient).
pub fn run_in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    if configured_threads().is_some() { pool().install(f) } else { f() }
}

/// Map `f` over `0..n` in parallel, returning results in index order.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    run_in_pool(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let v = par_map(100, |i| i * i);
        for (i, x) in v.iter().enumerate() {
            assert_eq!(*x, i * i);
        }
    }

    #[test]
    fn par_map_independent_of_ambient_pool_size() {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| par_map(257, |i| (i as f64).sin()));
        let b = quad.install(|| par_map(257, |i| (i as f64).sin()));
        assert_eq!(a, b);
    }
}
