//! Execution strategy for data-parallel helpers.
//!
//! Independent work items (grid points, Hamiltonian terms, branch checks) are
//! mapped through [`map_indexed`], which dispatches to rayon when compiled
//! with the `parallel` feature and the caller asks for [`Strategy::Parallel`].
//! Without the feature the parallel arm degrades to sequential iteration, so
//! the public API is identical in both builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent work items is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Strategy {
    /// The default strategy for this build: parallel when the feature is on.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(strategy: Strategy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match strategy {
        Strategy::Sequential => (0..n).map(f).collect(),
        Strategy::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Sum `f` over `0..n`.
pub fn sum_indexed<F>(strategy: Strategy, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match strategy {
        Strategy::Sequential => (0..n).map(f).sum(),
        Strategy::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).sum()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).sum()
            }
        }
    }
}
