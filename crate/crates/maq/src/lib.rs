//! Command-line plumbing for `maq-core`: JSON configuration, suite reports
//! and the CSV layouts used for fields, surface patches and convergence
//! tables.

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

use std::path::PathBuf;

pub use commands::{run_command, Command};
pub use config::ExperimentConfig;
pub use report::{Check, SuiteReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure on {path}: {message}")]
    IoFailure { path: PathBuf, message: String },
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::ConfigInvalid(e.to_string())
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::IoFailure {
            path: path.into(),
            message: e.to_string(),
        }
    }

    /// Process exit status: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::IoFailure { .. } | CliError::Runtime(_) => 3,
        }
    }
}
