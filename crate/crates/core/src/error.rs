use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("numerical breakdown at node {node}: {what}")]
    NumericalBreakdown { node: usize, what: String },

    #[error("invalid scenario parameter `{key}`: {reason}")]
    InvalidScenario { key: String, reason: String },

    #[error("refused: {0}")]
    Refused(String),

    #[error("invalid correspondence: {0}")]
    InvalidCorrespondence(String),

    #[error("invalid metric space: {0}")]
    InvalidMetricSpace(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
