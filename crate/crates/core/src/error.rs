use thiserror::Error;

use crate::problem::GroupKey;

/// Errors raised by the bound computations and their inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{0} must be non-empty")]
    EmptySet(&'static str),

    #[error("non-finite coordinate at position {0}")]
    NonFinite(usize),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("measurement {0} overflows the grouping key range")]
    KeyOverflow(f64),

    #[error("no measurement group with key {0}")]
    UnknownGroup(GroupKey),

    #[error("decoder has no output for group {0}")]
    MissingGroup(GroupKey),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("order p = {0} is invalid, expected p >= 1")]
    InvalidOrder(f64),

    #[error("policy mismatch: {0}")]
    PolicyMismatch(String),

    #[error("solver did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("{path}: {message}")]
    Spec { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}
