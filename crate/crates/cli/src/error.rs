use flowkit::{CompositionError, JobError, NetworkError, StoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("composition error: {0}")]
    Composition(#[from] CompositionError),
    #[error("job failed: {0}")]
    Job(#[from] JobError),
    #[error("config error: {0}")]
    Config(String),
    #[error("network error: {0}")]
    Network(#[from] NetworkError),
    #[error("store error: {0}")]
    Store(#[from] StoreError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Composition(_) => 2,
            CliError::Job(_) => 3,
            CliError::Config(_) => 4,
            _ => 1,
        }
    }
}
