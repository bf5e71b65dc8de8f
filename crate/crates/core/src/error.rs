//! Error types shared across the crate.

use serde::Serialize;
use thiserror::Error;

/// Parse failure with source position, reported per file and collected by
/// the pipeline without aborting the run.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{file}:{line}:{col}: syntax error: {message}")]
pub struct SyntaxError {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(file: &str, line: u32, col: u32, message: impl Into<String>) -> Self {
        SyntaxError {
            file: file.to_string(),
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaintError {
    #[error("pointer '{pointer}' is not declared in function '{function}'")]
    PointerNotInFunction { pointer: String, function: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    /// The pointer is declared but never used; the caller skips the slice.
    #[error("pointer '{pointer}' yields an empty slice in '{function}'")]
    EmptySlice { pointer: String, function: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymExecError {
    /// Construct outside the supported linear fragment; the pair under
    /// verification is skipped, not failed.
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("path explosion: more than {0} paths")]
    PathExplosion(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    /// Role-wise variable counts differ; the pair is a false positive.
    #[error("no role-respecting variable matching: {0}")]
    NoMatching(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("{variables} variables exceed the enumerable budget of {budget}")]
    DomainTooLarge { variables: usize, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    /// Weighting every differing dimension up to delta_max cannot push the
    /// pair beyond the clustering threshold.
    #[error("pair ({0}, {1}) not separable by weight feedback")]
    NonSeparable(String, String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus directory '{0}' contains no parseable .c files")]
    EmptyCorpus(String),
    #[error("all {0} corpus files failed to parse")]
    AllFilesFailed(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}
