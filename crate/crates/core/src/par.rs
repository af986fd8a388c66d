//! Execution-policy plumbing: data-parallel loops over rayon when the
//! `parallel` feature is on, with a sequential fallback that produces
//! bit-identical results.
//!
//! Every reduction in this crate merges per-chunk partial results in a fixed
//! chunk order, so outputs do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel sections execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use the global rayon pool (sequential when the `parallel` feature is
    /// disabled).
    #[default]
    Auto,
    /// Single-threaded, no rayon involvement.
    Sequential,
    /// A dedicated pool with the given thread count (0 behaves like `Auto`).
    Threads(usize),
}

/// Maps `f` over `items`, preserving input order in the output.
pub(crate) fn map_indexed<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    match par {
        Parallelism::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Auto => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Threads(0) => map_indexed(Parallelism::Auto, items, f),
        #[cfg(feature = "parallel")]
        Parallelism::Threads(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("thread pool construction");
            pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
        }
        #[cfg(not(feature = "parallel"))]
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Fixed chunk length for deterministic partial-sum accumulation.
pub(crate) const CHUNK: usize = 256;

/// Splits `items` into fixed-size chunks, maps each chunk to a partial
/// result (possibly in parallel), and folds the partials in chunk order.
/// The chunk boundaries never depend on the execution policy, so the fold
/// is bit-reproducible across thread counts.
pub(crate) fn chunked_fold<T, P, M, F>(par: Parallelism, items: &[T], map: M, mut fold: F) -> Option<P>
where
    T: Sync,
    P: Send,
    M: Fn(&[T]) -> P + Sync,
    F: FnMut(P, P) -> P,
{
    let chunks: Vec<&[T]> = items.chunks(CHUNK).collect();
    let partials = map_indexed(par, &chunks, |_, chunk| map(chunk));
    partials.into_iter().reduce(|a, b| fold(a, b))
}
