//! Batch execution of independent simulations.
//!
//! With the `parallel` feature (default) batches run on the rayon pool;
//! without it they run sequentially behind the same signature. Results are
//! order-preserving either way, and every task derives its own seed, so the
//! output is identical whichever path runs.

/// Apply `task` to every index in `0..n`, collecting results in order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, F>(n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(task).collect()
}

/// Apply `task` to every index in `0..n`, collecting results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, F>(n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_collect_seq(n, task)
}

/// Sequential twin of [`map_collect`], kept for comparison benchmarks.
pub fn map_collect_seq<T, F>(n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(task).collect()
}
