use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("preprocessing failed: {0}")]
    PreprocessFailure(String),

    #[error("parse error at {file}:{line}: {message}")]
    ParseFailure {
        file: String,
        line: u32,
        message: String,
    },

    #[error("knowledge graph schema error: {0}")]
    Schema(String),

    #[error("translation plan violation: {0}")]
    PlanViolation(String),

    #[error("refusing to scaffold into non-empty directory {0} (use --force)")]
    ScaffoldRefused(PathBuf),

    #[error("toolchain error: {0}")]
    Toolchain(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("analysis did not converge: {0}")]
    Unstable(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
