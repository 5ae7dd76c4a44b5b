//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) the batch loops of the crate run on the
//! rayon global pool. Without it, or when [`Execution::Sequential`] is requested, the
//! same closures run in a plain loop. Results always come back in input order, and
//! every per-item computation is identical on both paths, so outputs are bitwise equal.

/// How a batch loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the crate is built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
