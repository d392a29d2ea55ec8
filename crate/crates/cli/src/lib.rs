//! Harness for generating benchmark datasets, scoring estimators on them and
//! training the GRU readout.

pub mod audit;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod report;
pub mod train;

pub use audit::FileAudit;
pub use error::{HarnessError, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "PHYSPROP_THREADS";

/// Worker pool sized by `PHYSPROP_THREADS`, or by rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            HarnessError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| HarnessError::Usage(format!("cannot start worker pool: {e}")))
}
