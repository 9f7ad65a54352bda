//! Library side of the `twistz` command-line harness: config parsing,
//! parameter sweeps, finite-size trends, transition detection, table
//! serialization, and the oracle check battery.
//!
//! Sweep points are independent jobs run on a bounded worker pool; output
//! rows are ordered by input index, never by completion order, so a sweep is
//! bitwise reproducible for any worker count.

pub mod check;
pub mod config;
pub mod emit;
pub mod sweep;

pub use config::{parse_config, Config, ModelConfig, OutputFormat, ParseError, SweepSpec, Value};
pub use emit::{emit, parse_jsonl};
pub use sweep::{
    detect_transitions, finite_size_trend, run_sweep, ResultRow, ResultTable, Transition,
    TransitionKind,
};

use thiserror::Error;

/// CLI-level error with its process exit code.
///
/// Exit codes: 0 success, 1 usage or config parsing, 2 evaluation,
/// 3 oracle-check failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Evaluation(String),
    #[error("oracle check failed: {0}")]
    OracleCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Evaluation(_) => 2,
            CliError::OracleCheck(_) => 3,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}
