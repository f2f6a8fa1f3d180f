use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label {0:?} (expected one of TEXT, TABLE, CODE, FORMULA, MISC)")]
    UnknownLabel(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),

    #[error("cannot split {docs} documents into {k} folds")]
    TooFewDocuments { docs: usize, k: usize },

    #[error("invalid label ratios: {0}")]
    InvalidRatios(String),

    #[error("no token reaches the minimum count")]
    EmptyVocabulary,

    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },

    #[error("cannot score an empty line")]
    EmptyLine,

    #[error("feature configuration violation: {0}")]
    ConfigViolation(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus has unlabeled lines")]
    UnlabeledCorpus,

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("partitions cover different id sets")]
    CoverageMismatch,

    #[error("need at least one relevant and one irrelevant pair")]
    DegenerateLabels,

    #[error("logistic fit did not converge after {iterations} iterations{}", if *.separated { " (data are separable)" } else { "" })]
    NonConvergence { iterations: usize, separated: bool },

    #[error("topic {0:?} has no usable seed")]
    EmptyTopic(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
