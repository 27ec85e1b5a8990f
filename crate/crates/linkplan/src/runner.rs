//! Thread pools and wall-clock budgets for segment solves.

use std::time::{Duration, Instant};

use linkplan_core::localopt::PlannerParams;
use linkplan_core::planner::{SegmentResult, SegmentRunner};
use linkplan_core::solver::Budget;
use rayon::prelude::*;

/// Environment variable that overrides the default worker count.
pub const THREADS_ENV: &str = "LINKPLAN_THREADS";

/// Stops a solve once the wall clock passes a deadline.
#[derive(Debug, Clone, Copy)]
pub struct Deadline(pub Instant);

impl Deadline {
    pub fn after(seconds: f64) -> Self {
        Deadline(Instant::now() + Duration::from_secs_f64(seconds.max(0.0)))
    }
}

impl Budget for Deadline {
    fn exhausted(&self, _iterations: usize) -> bool {
        Instant::now() >= self.0
    }
}

struct Unlimited;

impl Budget for Unlimited {
    fn exhausted(&self, _iterations: usize) -> bool {
        false
    }
}

/// Worker count from `explicit`, else the environment, else all cores.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs segments on a dedicated rayon pool, or inline when `threads == 1`
/// and `sequential` is requested.
pub struct PoolRunner {
    pool: Option<rayon::ThreadPool>,
    wall_clock: bool,
}

impl PoolRunner {
    /// `wall_clock` enables the per-segment time budget; without it only the
    /// deterministic iteration cap applies.
    pub fn new(threads: usize, wall_clock: bool) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().ok();
        Self { pool, wall_clock }
    }

    /// Solves segments one at a time on the calling thread.
    pub fn sequential(wall_clock: bool) -> Self {
        Self { pool: None, wall_clock }
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map(|p| p.current_num_threads()).unwrap_or(1)
    }
}

impl SegmentRunner for PoolRunner {
    fn run(&self, count: usize, solve: &(dyn Fn(usize) -> SegmentResult + Sync)) -> Vec<SegmentResult> {
        match &self.pool {
            Some(pool) => pool.install(|| (0..count).into_par_iter().map(solve).collect()),
            None => (0..count).map(solve).collect(),
        }
    }

    fn budget(&self, params: &PlannerParams) -> Box<dyn Budget> {
        if self.wall_clock {
            Box::new(Deadline::after(params.time_budget))
        } else {
            Box::new(Unlimited)
        }
    }
}
