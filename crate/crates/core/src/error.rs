use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("count mismatch in task `{task_id}`: {detail}")]
    CountMismatch { task_id: String, detail: String },

    #[error("bad SMEB magic bytes")]
    BadMagic,

    #[error("unsupported SMEB version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated SMEB payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("SMEB payload has {0} trailing bytes")]
    TrailingBytes(u64),

    #[error("embedding dimension must be positive")]
    ZeroDim,

    #[error("non-finite embedding value at row {row}, col {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("task has no instances")]
    EmptyTask,

    #[error("zero-norm vector at row {0}")]
    ZeroNormVector(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("element {0} is already selected")]
    AlreadySelected(usize),

    #[error("similarity submatrix is not positive definite (adding element {0})")]
    NotPositiveDefinite(usize),

    #[error("ground set of size {0} is too large for exhaustive search (max 20)")]
    GroundSetTooLarge(usize),

    #[error("non-finite gain at position {0}")]
    NonFiniteGain(usize),

    #[error("budget {requested} exceeds available capacity {available}")]
    CapacityExceeded { requested: u64, available: u64 },

    #[error("budget {requested} exceeds corpus size {available}")]
    BudgetExceedsCorpus { requested: u64, available: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("task `{task_id}`: {source}")]
    InTask {
        task_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn in_task(self, task_id: &str) -> Self {
        Error::InTask {
            task_id: task_id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the root cause is a filesystem problem rather than bad content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::MissingFile(_) => true,
            Error::InTask { source, .. } | Error::Stage { source, .. } => source.is_io(),
            _ => false,
        }
    }

    /// Strips task/stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::InTask { source, .. } | Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
