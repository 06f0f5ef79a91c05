//! Sequential and data-parallel execution of the batch loops.
//!
//! With the `parallel` feature disabled, [`Strategy::Parallel`] runs
//! sequentially; results never depend on the strategy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Work items handed to one task for chunked loops.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// Maps `f` over `0..len`, results in index order.
    pub fn map_range<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }

    /// Maps `f` over the items of a slice, results in slice order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maps `f` over fixed-size chunks of a slice, results in chunk order.
    pub fn map_chunks<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&[T]) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_chunks(CHUNK).map(f).collect(),
            _ => items.chunks(CHUNK).map(f).collect(),
        }
    }
}
