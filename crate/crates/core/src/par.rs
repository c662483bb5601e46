//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default), `map_indexed` fans work out over
//! rayon and collects results in index order, so every caller that reduces
//! the returned `Vec` sequentially is bit-reproducible regardless of thread
//! count. Without the feature the same functions run on plain iterators.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, returning results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R, F: Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, returning results in input order.
#[cfg(feature = "parallel")]
pub fn map_slice<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs `f` inside a rayon pool with `threads` worker threads. With the
/// `parallel` feature disabled (or `threads == 0`) this is a plain call.
/// Benchmarks use it to compare single-threaded and multi-threaded runs of
/// the same code path.
#[cfg(feature = "parallel")]
pub fn with_thread_count<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("rayon pool");
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn with_thread_count<R>(_threads: usize, f: impl FnOnce() -> R) -> R {
    f()
}

/// Installs a global rayon pool capped at `threads` workers. Called once by
/// the CLI when `SPECTRAL_CUTS_THREADS` is set; later calls are ignored.
#[cfg(feature = "parallel")]
pub fn init_global_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn init_global_threads(_threads: usize) {}
