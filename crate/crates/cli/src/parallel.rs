//! Parallel ensembles.
//!
//! Replication `r` always runs with the same derived seed, so results are
//! identical to the sequential ensemble whatever the thread count.

use dealerfield_core::engine::simulate_replication;
use dealerfield_core::{RunResult, ValidConfig};
use rayon::prelude::*;

use crate::CliError;

pub const THREADS_VAR: &str = "DEALERFIELD_THREADS";

/// Thread cap from `DEALERFIELD_THREADS`; unset or `0` means automatic.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::BadThreadCount(v.clone())),
    }
}

pub fn run_ensemble(config: &ValidConfig) -> Result<Vec<RunResult>, CliError> {
    run_ensemble_with(config, thread_cap()?)
}

pub fn run_ensemble_with(config: &ValidConfig, threads: usize) -> Result<Vec<RunResult>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|r| simulate_replication(config, r))
            .collect()
    }))
}
