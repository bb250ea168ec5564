//! Library side of the `tfgnav` command-line tool: configuration resolution,
//! experiment orchestration and result files.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{resolve, ExperimentSpec, Overrides};
pub use run::{run_checks, run_experiment, ExperimentOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment failed: {0}")]
    Experiment(#[from] tfgnav::NavError),
    #[error("cannot serialize summary: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Reports a value error under a different name (a flag instead of the
    /// config key it feeds).
    pub(crate) fn renamed(self, name: &str) -> Self {
        match self {
            CliError::InvalidValue { msg, .. } => CliError::InvalidValue {
                key: name.to_string(),
                msg,
            },
            other => other,
        }
    }
}
