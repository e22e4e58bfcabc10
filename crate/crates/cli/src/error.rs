use std::fmt;

use leaderscope::Error;

/// Process exit codes; success is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    InvalidConfig = 2,
    InvalidInput = 3,
    Precondition = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::InvalidConfig,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::InvalidInput,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Precondition,
            message: message.into(),
        }
    }

    /// Library errors raised while validating the field `field`.
    pub fn field(field: &str, e: Error) -> Self {
        CliError {
            status: ExitStatus::InvalidConfig,
            message: format!("invalid `{field}`: {e}"),
        }
    }

    pub fn code(&self) -> i32 {
        self.status as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } | Error::InvalidShape(_) | Error::FilterMismatch { .. } => ExitStatus::InvalidInput,
            Error::IndexConditionViolated(_)
            | Error::CompatibilityViolated(_)
            | Error::OutOfDomain(_)
            | Error::ResolutionError(_)
            | Error::NoValidM0(_) => ExitStatus::Precondition,
            Error::InvalidSequence(_) | Error::InvalidArgument(_) => ExitStatus::InvalidConfig,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
