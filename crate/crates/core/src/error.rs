use std::path::PathBuf;

/// Errors raised by the evaluation library.
///
/// Everything except [`Error::Io`] is an input-validation failure; the CLI maps
/// the former to exit code 2 and the rest to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sentence is empty after trimming whitespace")]
    EmptySentence,

    #[error("reference list is empty")]
    EmptyReferences,

    #[error("{0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix weight at ({row}, {col}) is not finite")]
    NonFiniteWeight { row: usize, col: usize },

    #[error("matrix weight {value} at ({row}, {col}) is outside [0, 100]")]
    WeightOutOfRange { row: usize, col: usize, value: f64 },

    #[error("brute-force matching refused for a {rows}x{cols} matrix")]
    BruteForceTooLarge { rows: usize, cols: usize },

    #[error(
        "instance {id:?}: {outputs} outputs vs {references} references (pass allow_unequal to match the smaller set)"
    )]
    UnequalSetSizes {
        id: String,
        outputs: usize,
        references: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: duplicate id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId {
        path: String,
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("unknown instance id {0:?}")]
    UnknownId(String),

    #[error("no outputs bound for instance id {0:?}")]
    MissingId(String),

    #[error("{path}: expected {expected} lines, found {found}")]
    LineCountMismatch {
        path: String,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, false for validation failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
