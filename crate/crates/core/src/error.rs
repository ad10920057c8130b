use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid feedback: {0}")]
    InvalidFeedback(String),
    #[error("invalid game parameters: {0}")]
    InvalidParams(String),
    #[error("remaining code set is empty")]
    EmptyState,
    #[error("feedback table of {entries} entries exceeds budget of {budget}")]
    TableTooLarge { entries: u64, budget: u64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("depth bound {max_depth} exceeded on branch {branch}")]
    DepthExceeded { max_depth: u32, branch: String },
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown bundled weights `{0}`")]
    UnknownWeights(String),
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
