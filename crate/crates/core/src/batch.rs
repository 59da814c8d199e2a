//! Running many independent jobs at once.
//!
//! Each job is internally sequential. With the `parallel` feature the jobs
//! are spread over the rayon pool; without it `run_batch` falls back to a
//! plain loop. Results come back in input order either way.

use crate::error::Result;
use crate::report::{run_compare, run_scenario, RunResult};
use crate::scenario::Scenario;

/// Applies `f` to every item in order on the calling thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Applies `f` to every item on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Parallel when the feature is on, sequential otherwise.
pub fn map_batch<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<RunResult>> {
    map_batch(scenarios, run_scenario)
}

pub fn run_batch_sequential(scenarios: &[Scenario]) -> Vec<Result<RunResult>> {
    map_sequential(scenarios, run_scenario)
}

pub fn run_compare_batch(scenarios: &[Scenario]) -> Vec<Result<Vec<RunResult>>> {
    map_batch(scenarios, run_compare)
}
