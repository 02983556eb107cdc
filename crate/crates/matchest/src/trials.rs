//! Trial execution: data-parallel across trials via rayon when the
//! `parallel` feature is on, with a sequential fallback that produces
//! byte-identical results. Each trial owns a derived RNG stream keyed by
//! its index, so output never depends on scheduling order or worker count.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Default for Parallelism {
    /// Parallel when compiled with the `parallel` feature, else sequential.
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

/// Runs `f(0..count)` and collects results in trial order.
pub fn run_trials<T: Send>(
    count: u64,
    mode: Parallelism,
    f: impl Fn(u64) -> T + Sync + Send,
) -> Vec<T> {
    match mode {
        Parallelism::Sequential => (0..count).map(f).collect(),
        Parallelism::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(f).collect()
            }
        }
    }
}
