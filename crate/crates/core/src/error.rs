use thiserror::Error;

/// Errors raised by the group, model and filter layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NavError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The logarithm is not unique at a rotation of exactly π.
    #[error("logarithm is ambiguous at rotation angle {theta}")]
    BranchAmbiguity { theta: f64 },

    #[error("lever-arm convention mismatch: expected {expected}, got {found}")]
    ConventionMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("state violates problem {problem} frozen field: {field}")]
    FrozenField { problem: u8, field: &'static str },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, NavError>;
