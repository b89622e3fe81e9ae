//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) and more than one job, work runs on
//! a dedicated rayon pool. Results always come back in input order, so
//! callers can merge them deterministically.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[derive(Clone)]
pub struct Executor {
    jobs: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("jobs", &self.jobs).finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            jobs: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// An executor with `jobs` workers. Without the `parallel` feature this
    /// is the sequential executor.
    pub fn new(jobs: usize) -> Self {
        let jobs = jobs.max(1);
        #[cfg(feature = "parallel")]
        {
            if jobs > 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    return Executor {
                        jobs,
                        pool: Some(Arc::new(pool)),
                    };
                }
            }
        }
        let _ = jobs;
        Self::sequential()
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}
