//! Sequential / rayon dispatch for the data-parallel inner loops.

use std::ops::Range;

/// How data-parallel loops are executed.
///
/// `Parallel` uses rayon when the crate is built with the `parallel`
/// feature; without it, `Parallel` silently runs sequentially. Both paths
/// produce identical results: work is split over independent items (guesses,
/// trace indices, experiment cells) and each item is reduced in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
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

impl Execution {
    pub(crate) fn map_range<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Calls `f(row_index, row)` for each `row_len`-sized chunk of `data`.
    pub(crate) fn for_each_row<T, F>(self, data: &mut [T], row_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if row_len == 0 {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                data.par_chunks_mut(row_len)
                    .enumerate()
                    .for_each(|(i, row)| f(i, row));
            }
            _ => data
                .chunks_mut(row_len)
                .enumerate()
                .for_each(|(i, row)| f(i, row)),
        }
    }
}
