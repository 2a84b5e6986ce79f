use std::path::PathBuf;

use crate::model::ValueKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("object not found: {0}")]
    NotFound(String),

    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: ValueKind, found: ValueKind },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{0}` is not indexed")]
    NotIndexed(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid predicate: {0}")]
    Predicate(String),

    #[error("predicate is not cacheable: {0}")]
    NotCacheable(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("plan enumeration needs {combinations} combinations, bound is {bound}; use the greedy solver")]
    TooManyCombinations { combinations: u128, bound: u128 },

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("result mismatch: {0}")]
    Mismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
