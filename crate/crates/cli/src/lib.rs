//! Experiment runner, parameter scans and invariant suites on top of `ineqlab`.

pub mod config;
pub mod run;
pub mod verify;

pub use config::ExperimentConfig;
pub use run::{evaluate, run, scan, Evaluation, Sweep, SCHEMA};
pub use verify::{verify, Check};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] ineqlab::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            Self::Library(e) => e.kind(),
            Self::Csv(_) => "csv",
        }
    }
}
