use std::path::PathBuf;

use crate::llm::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("template `{template}`: {message}")]
    Template { template: String, message: String },

    #[error("provider failure: {0}")]
    Provider(#[from] ProviderError),

    #[error("question {question_id} has {available} unit tests, at least {required} are needed")]
    NotEnoughTests { question_id: String, available: usize, required: usize },

    #[error("sandbox failure: {0}")]
    Sandbox(String),

    #[error("{0}")]
    Metric(String),

    #[error("duplicate key {0}")]
    DuplicateKey(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Provider(_) => 3,
            Error::Sandbox(_) => 4,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
