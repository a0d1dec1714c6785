use std::path::PathBuf;

use crate::model::JointKind;

/// Coarse classification used by front ends to pick exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Internal,
    Cancelled,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("gene {index}: length coefficient {value} is outside [0, 1]")]
    GeneOutOfRange { index: usize, value: f64 },

    #[error("genome has {kinds} joint genes but {coefficients} length genes")]
    GenomeShape { kinds: usize, coefficients: usize },

    #[error("module {index} ({kind}): length {length} m is outside [{min}, {max}]")]
    LengthOutOfRange {
        index: usize,
        kind: JointKind,
        length: f64,
        min: f64,
        max: f64,
    },

    #[error("joint state has {given} entries but the design has {expected} degrees of freedom")]
    DimensionMismatch { expected: usize, given: usize },

    #[error("design string, entry {entry} (column {column}): {message}")]
    DesignParse {
        entry: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("failed to parse scenario: {0}")]
    ScenarioParse(String),

    #[error("unknown builtin scenario `{0}`")]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run cancelled")]
    Cancelled,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Internal(_) => ErrorKind::Internal,
            Error::Cancelled => ErrorKind::Cancelled,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
