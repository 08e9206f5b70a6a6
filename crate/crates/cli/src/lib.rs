//! Experiment runner: configuration, check dispatch and deterministic report files.

pub mod bundle;
pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod json;

pub use bundle::{run_suite, write_outputs, ReportBundle};
pub use config::{Check, ExperimentConfig, GraphSpec};
pub use error::CliError;
