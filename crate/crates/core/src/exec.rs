//! Ordered map over an index range, on the rayon pool when the `parallel`
//! feature is enabled.

/// How embarrassingly parallel loops are driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// `(0..n).map(f)` collected in index order regardless of completion
    /// order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
        }
    }
}

/// Environment variable that caps the worker pool size.
pub const WORKERS_ENV: &str = "FASRIS_WORKERS";

/// Size the global pool from `FASRIS_WORKERS` if set. Call once, early.
pub fn init_workers_from_env() -> Result<(), String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err(format!("{WORKERS_ENV} must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(())
}
