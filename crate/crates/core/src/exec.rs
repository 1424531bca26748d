//! Multistart job execution.
//!
//! Every multistart search in the crate goes through [`map_jobs`]. With the
//! `parallel` feature the jobs run on the rayon pool; without it, or when the
//! caller asks for [`Execution::Sequential`], they run in order on the calling
//! thread. Each job derives its own RNG stream from its index, so results are
//! identical under both modes.

/// How independent multistart jobs are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when jobs will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Caps the worker pool at `threads`. Only the first call has an effect, and
/// only before any parallel work has run; returns false otherwise or when
/// the crate is built without `parallel`.
pub fn set_max_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

pub(crate) fn map_jobs<T, R, F>(exec: Execution, jobs: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            use rayon::prelude::*;
            return jobs.into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    jobs.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let jobs: Vec<u64> = (0..100).collect();
        let a = map_jobs(Execution::Sequential, jobs.clone(), |x| x * x);
        let b = map_jobs(Execution::Parallel, jobs, |x| x * x);
        assert_eq!(a, b);
    }
}
