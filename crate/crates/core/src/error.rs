use std::path::PathBuf;

use crate::data::Feature;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes. The CLI maps these onto its exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Data,
    Usage,
    Numerical,
}

impl ErrorKind {
    /// 1 for IO and data problems, 2 for usage, 3 for numerical failure.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io | ErrorKind::Data => 1,
            ErrorKind::Usage => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("record is missing required feature `{0}`")]
    MissingFeature(Feature),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("unknown view `{0}` (expected d1, d2-mte or d2-ete)")]
    UnknownView(String),

    #[error("unknown pipeline `{0}`")]
    UnknownPipeline(String),

    #[error("view {view} is empty after excluding {excluded} incomplete rows")]
    EmptyView { view: String, excluded: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("{0}")]
    Parse(String),

    #[error("zero variance in `{0}`: correlation undefined")]
    ZeroVariance(String),

    #[error("R² undefined: target values are constant")]
    UndefinedR2,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible correlation targets: {0}")]
    Infeasible(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("design matrix is rank deficient even with ridge fallback")]
    RankDeficient,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    /// A failed cell of an experiment matrix, keeping the original class.
    #[error("{message}")]
    Experiment { kind: ErrorKind, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Experiment { kind, .. } => *kind,
            Error::Io { .. } => ErrorKind::Io,
            Error::MissingFeature(_)
            | Error::EmptyView { .. }
            | Error::Empty(_)
            | Error::Header(_)
            | Error::Parse(_)
            | Error::ZeroVariance(_)
            | Error::UndefinedR2 => ErrorKind::Data,
            Error::DimensionMismatch { .. }
            | Error::InvalidWeights(_)
            | Error::UnknownView(_)
            | Error::UnknownPipeline(_)
            | Error::InvalidArgument(_)
            | Error::Infeasible(_)
            | Error::Checkpoint(_) => ErrorKind::Usage,
            Error::NonFinite(_) | Error::Divergence { .. } | Error::RankDeficient => {
                ErrorKind::Numerical
            }
        }
    }
}
