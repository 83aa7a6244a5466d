//! Execution-mode selection for the data-parallel inner loops.
//!
//! The heavy loops (oracle enumeration, branch-and-bound node waves, benchmark
//! cells) accept an [`ExecMode`]. With the `parallel` feature enabled,
//! `ExecMode::Parallel` runs them on the rayon pool; without the feature, or
//! with `ExecMode::Sequential`, they run on the calling thread. Results are
//! identical in both modes — every parallel reduction in this crate is over a
//! total order, so the merge is associative and order-independent.

/// Whether a data-parallel loop may use the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Single-threaded; the strict deterministic mode.
    #[default]
    Sequential,
    /// Use rayon when the `parallel` feature is compiled in; otherwise
    /// silently behaves like [`ExecMode::Sequential`].
    Parallel,
}

impl ExecMode {
    /// The mode that will actually run, accounting for the feature flag.
    pub fn effective(self) -> ExecMode {
        #[cfg(feature = "parallel")]
        {
            self
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = self;
            ExecMode::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        self.effective() == ExecMode::Parallel
    }
}

/// Number of workers a parallel loop would use.
pub fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Map `f` over `items`, sequentially or on the rayon pool, preserving order.
pub(crate) fn map_collect<T, U, F>(mode: ExecMode, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}
