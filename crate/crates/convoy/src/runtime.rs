//! Thread pool and wall clock for the core's execution hooks.

use std::time::Instant;

use convoy_core::exec::{Clock, Executor};
use rayon::prelude::*;

/// Maps on a dedicated rayon pool.
#[derive(Debug)]
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if self.threads() == 1 {
            return items.iter().map(f).collect();
        }
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WallClock;

impl Clock for WallClock {
    type Instant = Instant;

    fn now(&self) -> Instant {
        Instant::now()
    }

    fn elapsed_ms(&self, since: Instant) -> f64 {
        since.elapsed().as_secs_f64() * 1000.0
    }
}
