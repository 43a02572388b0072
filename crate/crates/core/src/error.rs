use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("training diverged: non-finite loss at batch {batch}")]
    Divergence { batch: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("weight w[{row}][{col}] = {value} is outside [-1, 1]")]
    WeightOutOfRange { row: usize, col: usize, value: f64 },

    #[error("self-loop w[{index}][{index}] = {value} is not allowed (allow_self_loops = false)")]
    SelfLoop { index: usize, value: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown linguistic term {term:?}; available terms: {}", available.join(", "))]
    UnknownTerm { term: String, available: Vec<String> },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            context,
            detail: detail.into(),
        }
    }

    /// Wraps an error with the path of the file that caused it.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line tool: 3 for input and
    /// validation problems, 4 for numeric or training failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } | Error::Numeric(_) => 4,
            Error::File { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
