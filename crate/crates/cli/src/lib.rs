//! Experiment runner for the dealerfield market-making model.
//!
//! Reads JSON configurations or named presets, runs seeded ensembles in
//! parallel and writes CSV tables, quote schedules, per-step traces and a
//! check report. The numerics live in `dealerfield-core`.

use std::path::PathBuf;

use dealerfield_core::ladder::LadderError;
use dealerfield_core::metrics::MetricsError;
use dealerfield_core::model::ValidationErrors;
use thiserror::Error;

pub mod app;
pub mod checks;
pub mod config;
pub mod output;
pub mod parallel;
pub mod presets;

pub use app::{run, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown subcommand `{0}` (expected simulate, tables, quotes, check or trace)")]
    UnknownSubcommand(String),
    #[error("unknown preset `{0}` (expected table1 .. table9)")]
    UnknownPreset(String),
    #[error("{0}")]
    Usage(String),
    #[error("either --config or --preset is required")]
    MissingSource,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Parse(#[source] serde_json::Error),
    #[error("invalid config: {0}")]
    Validation(#[from] ValidationErrors),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("DEALERFIELD_THREADS must be a non-negative integer, got `{0}`")]
    BadThreadCount(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("dealer {dealer} out of range for {n} dealers")]
    DealerOutOfRange { dealer: usize, n: usize },
}

impl CliError {
    pub(crate) fn csv(path: &std::path::Path, e: csv::Error) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}
