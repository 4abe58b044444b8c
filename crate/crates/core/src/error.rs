use thiserror::Error;

use crate::trajectory::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported conjugacy pair: {from} -> {to}")]
    UnsupportedPair { from: String, to: String },

    #[error("numeric failure after {} states: {message}", .partial.states.len())]
    NumericFailure {
        message: String,
        partial: Box<Trajectory>,
        #[source]
        cause: Option<Box<Error>>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("cardinality mismatch: {left} vs {right} eigenvalues")]
    CardinalityMismatch { left: usize, right: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("external step failed: {0}")]
    Step(String),

    #[error("stage `{stage}` failed after writing {} files: {cause}", .written.len())]
    Preset {
        stage: String,
        written: Vec<String>,
        #[source]
        cause: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Config(_) => "config",
            Error::UnsupportedPair { .. } => "unsupported-pair",
            Error::NumericFailure { cause: Some(c), .. } if matches!(**c, Error::Step(_)) => "step",
            Error::NumericFailure { .. } => "numeric-failure",
            Error::InsufficientData(_) => "insufficient-data",
            Error::DegenerateData(_) => "degenerate-data",
            Error::InvalidObservable(_) => "invalid-observable",
            Error::CardinalityMismatch { .. } => "cardinality-mismatch",
            Error::Parse { .. } => "parse",
            Error::Step(_) => "step",
            Error::Preset { cause, .. } => cause.kind(),
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
