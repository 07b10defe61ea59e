use adlm_core::localization::NodeExecutor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Runs node subproblems on a rayon pool. Results come back in node order,
/// so traces match the sequential executor bit for bit.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads = 0` lets rayon pick the worker count.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl NodeExecutor for Parallel {
    fn map_nodes<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
