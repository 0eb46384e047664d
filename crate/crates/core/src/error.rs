use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("invalid variable order: {}", .0.join("; "))]
    VariableOrder(Vec<String>),

    #[error("invalid join tree: {0}")]
    JoinTree(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("gradient descent diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("update stream line {line}: {message}")]
    UpdateStream { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
