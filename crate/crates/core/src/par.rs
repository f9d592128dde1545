//! Trial-level data parallelism.
//!
//! Every parallel loop in the crate is an indexed map whose body is a pure
//! function of its index, so [`ExecMode::Sequential`] and
//! [`ExecMode::Parallel`] produce identical, identically ordered output.
//! Without the `parallel` feature both modes run sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this build can actually run work on multiple threads.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `0..n`, preserving index order in the result.
pub fn map_indexed<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], mode: ExecMode, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), mode, |i| f(&items[i]))
}
