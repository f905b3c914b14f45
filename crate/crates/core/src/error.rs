use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("unknown label column {0:?}")]
    UnknownLabelColumn(String),
    #[error("incomplete label columns: {0}")]
    IncompleteLabels(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("keyword {0:?} is not a single lowercase token")]
    MultiWordKeyword(String),
    #[error("category {0} has no keywords")]
    EmptyCategory(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid split ratios {0:?}: must be non-negative and sum to 1")]
    InvalidSplit([f64; 3]),
    #[error("input has {count} tokens but the limit is {limit} (max_len minus start/end markers); inputs are never truncated")]
    OverLength { count: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("pretrained encoder weights not found: {0}")]
    MissingPretrained(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("document ids do not match: {0}")]
    IdMismatch(String),
    #[error("document {0:?} has no labels")]
    Unlabeled(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
