//! Work scheduling for tile-parallel passes.

use alloc::vec::Vec;

/// Runs `count` independent jobs and returns their results in job order.
///
/// Implementations may run jobs concurrently; callers only ever merge the
/// results in index order, so output does not depend on the runner.
pub trait TileRunner {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl TileRunner for Serial {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}
