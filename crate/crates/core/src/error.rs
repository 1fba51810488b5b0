use thiserror::Error;

/// Errors raised by the toolkit. Every fallible public operation returns
/// [`Result`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("grid function invariant violated: {0}")]
    InvalidGridFunction(String),

    #[error("function is improper (identically +inf)")]
    Improper,

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid probability space: {0}")]
    InvalidProbabilitySpace(String),

    #[error("invalid random variable: {0}")]
    InvalidRandomVariable(String),

    #[error("invalid scenario measure: {0}")]
    InvalidScenario(String),

    #[error("invalid Orlicz function: {0}")]
    InvalidOrlicz(String),

    #[error("Orlicz table cannot be evaluated at {x} (table covers [{lo}, {hi}])")]
    OrliczTableRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("probabilities not representable on a common equiprobable space: {0}")]
    NotEmbeddable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
