//! Data-parallel helpers. With the `parallel` feature disabled every
//! call runs sequentially; results are always returned in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;

/// How batch work (clips, folds) is scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool when built with `parallel`, sequential otherwise.
    #[default]
    Parallel,
}

pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Like [`map_indexed`], but fails with the lowest-index error so the
/// reported failure does not depend on scheduling.
pub fn try_map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, exec, f).into_iter().collect()
}
