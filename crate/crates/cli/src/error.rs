use std::path::PathBuf;

use linesift::Error as CoreError;
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const IO: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const THRESHOLD: i32 = 4;
    pub const CONFIG: i32 = 5;
    pub const COMPUTATION: i32 = 6;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    Config(String),

    #[error("macro-F1 {found:.4} is below the required {required:.4}")]
    Threshold { found: f64, required: f64 },

    #[error("{}: written output failed validation: {message}", path.display())]
    Validation { path: PathBuf, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
            CliError::Threshold { .. } => exit::THRESHOLD,
            CliError::Validation { .. } => exit::INTERNAL,
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        Io { .. } => exit::IO,
        UnknownLabel(_)
        | Parse { .. }
        | DuplicateDocId(_)
        | DimensionMismatch { .. }
        | EmptyCorpus
        | UnlabeledCorpus
        | LengthMismatch { .. }
        | CoverageMismatch
        | TooFewDocuments { .. }
        | VersionMismatch { .. }
        | Json(_)
        | EmptyLine => exit::INPUT,
        InvalidRatios(_) | ConfigViolation(_) | InvalidArgument(_) | InvalidPriors(_) => exit::CONFIG,
        NonConvergence { .. } | DegenerateLabels | EmptyTopic(_) | EmptyVocabulary => exit::COMPUTATION,
    }
}
