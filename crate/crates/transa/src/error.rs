use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset handling, scoring, training and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: expected 3 tab-separated fields (4 with a trailing label), got {fields}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        fields: usize,
    },

    #[error("{path}:{line}: unknown label token `{token}` (expected 1 or -1)")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("train split is empty")]
    EmptyTrainSplit,

    #[error("train split carries negative labels, which is unsupported")]
    NegativeTrainTriple,

    #[error("unknown relation id {0}")]
    UnknownRelation(u32),

    #[error("relation `{0}` not found in vocabulary")]
    UnknownRelationName(String),

    #[error("entity `{0}` not found in vocabulary")]
    UnknownEntityName(String),

    #[error("no admissible corruption for the {slot} slot: all {candidates} replacements are positives")]
    DegenerateCorruption { slot: &'static str, candidates: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("embedding dimension {0} exceeds the supported maximum of {max}", max = crate::linalg::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("weight matrix is not symmetric: |W - W^T| max entry {0:e}")]
    AsymmetricWeight(f64),

    #[error("weight matrix has a negative entry {value:e} at ({row}, {col})")]
    NegativeWeightEntry { row: usize, col: usize, value: f64 },

    #[error("weight matrix is not positive semidefinite: smallest eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {context} at epoch {epoch}")]
    NonFinite { context: String, epoch: usize },

    #[error("validation split carries no labels; classification requires labeled triples")]
    MissingLabels,

    #[error("need at least {need} vectors, got {got}")]
    TooFewVectors { need: usize, got: usize },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
