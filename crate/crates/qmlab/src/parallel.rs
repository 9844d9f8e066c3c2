//! Worker pool for sweeps and independent Markov chains.
//!
//! Every parallel task depends only on its own inputs (sweep point, chain
//! index), and results are collected in input order, so outputs do not
//! depend on the number of threads.

use crate::error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QMLAB_THREADS";

/// Worker count from `QMLAB_THREADS`, or `None` for the rayon default.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::config(format!("{THREADS_ENV}='{s}' is not a positive integer"))),
        },
    }
}

/// A pool honoring `QMLAB_THREADS`.
pub fn pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::config(format!("cannot start worker threads: {e}")))
}
