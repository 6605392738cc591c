use std::fmt;
use std::path::PathBuf;

use crate::model::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One rejected record from dataset validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordIssue {
    /// Position of the record in the raw input.
    pub index: usize,
    pub reason: String,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {}: {}", self.index, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid rating scale: {0}")]
    InvalidScale(String),

    #[error("invalid rating {value}: outside the valid range and not the unknown marker")]
    InvalidRating { value: i64 },

    #[error("rating {value} is the unknown marker and cannot be normalized")]
    NotNormalizable { value: i64 },

    #[error("dataset validation failed: {}", join_issues(.0))]
    Validation(Vec<RecordIssue>),

    #[error("node `{0}` not found")]
    NodeNotFound(NodeId),

    #[error("node `{0}` has no incoming interactions")]
    NoHistory(NodeId),

    #[error("dataset has no nodes")]
    EmptyDataset,

    #[error("dataset has no rated nodes; ground truth is empty")]
    EmptyGroundTruth,

    #[error("key sets differ; only predicted: {only_predicted:?}, only truth: {only_truth:?}")]
    KeyMismatch {
        only_predicted: Vec<NodeId>,
        only_truth: Vec<NodeId>,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} entries, got {available}")]
    TooFewEntries { needed: usize, available: usize },

    #[error("k must be at least 1")]
    ZeroK,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("matrix row {row}, column {column}: {message}")]
    MatrixCell {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("malformed matrix: {0}")]
    MatrixShape(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

fn join_issues(issues: &[RecordIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
