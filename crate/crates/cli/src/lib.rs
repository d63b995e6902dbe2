//! Command-line harness for the streaming best-arm simulator.
//!
//! All logic lives in the library so integration tests can drive commands
//! in-process; the binary is a thin argument parser. Commands are pure
//! functions of (config, seed): re-running one writes byte-identical files.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use config::{ExperimentConfig, InstanceSpec, SolverConfig};

/// Command failures, partitioned by exit code: 2 for configuration problems,
/// 3 for budgets below the feasibility threshold, 4 for everything else.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Failure(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Infeasible(msg) => write!(f, "{msg}"),
            CliError::Failure(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<stream_bai_core::Error> for CliError {
    fn from(err: stream_bai_core::Error) -> Self {
        match err {
            stream_bai_core::Error::InfeasibleBudget { .. } => CliError::Infeasible(err.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
