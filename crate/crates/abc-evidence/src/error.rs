//! Error taxonomy shared by every pipeline stage.
//!
//! Failures are values: library code never aborts the process. The CLI maps
//! [`ErrorKind`] onto exit codes (configuration errors exit 2, runtime errors
//! exit 3).

use thiserror::Error;

/// Broad failure class, used by front-ends to pick exit codes and by tests
/// to assert on error paths without string matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A per-acceptance attempt cap was exhausted.
    BudgetExceeded,
    /// An observed value never appeared among the simulated draws, so an
    /// unsmoothed likelihood estimate would be log(0).
    UnseenObservation,
    /// A parameter, configuration key, or argument combination is invalid.
    InvalidConfig,
    /// A sample is too degenerate to work with (e.g. zero spread, zero count).
    DegenerateSample,
}

/// Error type carried through the whole pipeline.
#[derive(Debug, Clone, Error)]
pub enum ToolError {
    #[error("attempt budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unseen observation: {0}")]
    UnseenObservation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

impl ToolError {
    /// Rebuild an error of the same kind with new context, e.g. to prefix a
    /// replicate index onto a worker failure.
    pub fn from_kind_message(kind: ErrorKind, message: String) -> Self {
        match kind {
            ErrorKind::BudgetExceeded => ToolError::BudgetExceeded(message),
            ErrorKind::UnseenObservation => ToolError::UnseenObservation(message),
            ErrorKind::InvalidConfig => ToolError::InvalidConfig(message),
            ErrorKind::DegenerateSample => ToolError::DegenerateSample(message),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            ToolError::BudgetExceeded(_) => ErrorKind::BudgetExceeded,
            ToolError::UnseenObservation(_) => ErrorKind::UnseenObservation,
            ToolError::InvalidConfig(_) => ErrorKind::InvalidConfig,
            ToolError::DegenerateSample(_) => ErrorKind::DegenerateSample,
        }
    }

    /// Exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::InvalidConfig => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_maps_to_one_exit_code() {
        assert_eq!(ToolError::InvalidConfig("x".into()).exit_code(), 2);
        assert_eq!(ToolError::BudgetExceeded("x".into()).exit_code(), 3);
        assert_eq!(ToolError::UnseenObservation("x".into()).exit_code(), 3);
        assert_eq!(ToolError::DegenerateSample("x".into()).exit_code(), 3);
    }
}
