//! Experiment orchestration for the piecewise-OU toolkit: configuration
//! ingestion, the five experiment runners, and CSV/SVG result emission.

pub mod config;
pub mod experiments;
pub mod io;

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem trouble while emitting artifacts.
    #[error("io error: {0}")]
    Io(String),

    /// A pipeline stage failed mid-run.
    #[error("run error: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind};
pub use experiments::{run, RunOutcome};
