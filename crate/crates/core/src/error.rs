//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid utf-8 in {path} at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    /// A structurally broken input file (bad TSV/JSONL/layout line).
    #[error("malformed {format} at {path}:{line}: {message}")]
    Malformed {
        format: &'static str,
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A well-formed record that violates the declared schema.
    #[error("schema violation at {path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("segment index mismatch: {0}")]
    IndexMismatch(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("keyboard layout: {0}")]
    Layout(String),

    /// Failure driving an external system over the line protocol.
    #[error("external system `{system}`: {message}")]
    External { system: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
