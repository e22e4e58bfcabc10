use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid admissible sequence: {0}")]
    InvalidSequence(String),
    #[error("index condition violated: {0}")]
    IndexConditionViolated(String),
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("compatibility violated: {0}")]
    CompatibilityViolated(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("filter mismatch: pyramid built with `{expected}`, got `{found}`")]
    FilterMismatch { expected: String, found: String },
    #[error("insufficient resolution: {0}")]
    ResolutionError(String),
    #[error("no valid m0: {0}")]
    NoValidM0(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
