//! Batch helpers that run on the rayon thread pool when the `parallel`
//! feature is enabled (the default) and sequentially otherwise.
//!
//! Callers express data-parallel work through [`map_collect`]; the feature
//! flag decides how it executes, so algorithm code never branches on it.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Batches smaller than this run sequentially even when rayon is available;
/// below it the fan-out overhead outweighs the work.
pub const PARALLEL_THRESHOLD: usize = 16;

/// Whether this build executes large batches on the rayon pool.
pub const PARALLEL_ENABLED: bool = cfg!(feature = "parallel");

/// Applies `f` to every item and collects the results in input order.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if items.len() >= PARALLEL_THRESHOLD {
        return items.par_iter().map(&f).collect();
    }
    items.iter().map(f).collect()
}
