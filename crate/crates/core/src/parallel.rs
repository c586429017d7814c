//! Row-partitioned execution with a sequential fallback.
//!
//! Every caller merges partial results with an associative, commutative
//! operation (set union, keyed minimum), so the parallel and sequential paths
//! return identical results.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled; otherwise
    /// identical to `Sequential`.
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

pub(crate) fn fold_rows<T, I, F, M>(rows: usize, par: Parallelism, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, usize) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return (0..rows).into_par_iter().fold(&init, &fold).reduce(&init, &merge);
    }
    let _ = (&merge, par);
    (0..rows).fold(init(), fold)
}

pub(crate) fn map_rows<T, F>(rows: usize, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return (0..rows).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..rows).map(f).collect()
}
