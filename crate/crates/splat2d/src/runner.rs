//! Thread-pool tile runner.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};
use splat2d_core::TileRunner;

/// Environment variable consulted when no explicit thread count is given.
pub const THREADS_ENV: &str = "SPLAT2D_THREADS";

/// Runs tile jobs on a dedicated rayon pool. Results come back in job order,
/// so renders are identical to [`splat2d_core::Serial`].
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads = 0` lets rayon pick (one per core).
    pub fn new(threads: usize) -> Result<Self, ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl TileRunner for Parallel {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(job).collect())
    }
}
