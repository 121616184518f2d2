use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state at index {index} lies outside the phase space: {detail}")]
    Domain { index: i64, detail: String },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported map: {0}")]
    Unsupported(String),

    #[error("orbits cannot be glued at junction {junction} (round {round}): {reason}")]
    NonGluable {
        junction: i64,
        round: usize,
        reason: String,
    },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
