use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input too short or empty for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Non-finite or otherwise physically invalid sample data.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A caller violated an operation's preconditions.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: field `{field}`: {message}")]
    Parse { path: String, line: u64, field: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training diverged at training epoch {epoch}, batch {batch}: {message}")]
    Diverged { epoch: usize, batch: usize, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(
        path: impl Into<String>,
        line: u64,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse { path: path.into(), line, field: field.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
