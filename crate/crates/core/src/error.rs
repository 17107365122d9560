use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ScfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ScfError {
    /// Inconsistent model or run configuration (shape mismatch, bad parameter range, unknown key).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or unsupported input data.
    #[error("input error: {0}")]
    Input(String),

    /// Training produced a non-finite value.
    #[error("training error: {0}")]
    Training(String),

    /// A verification check (e.g. gradient check) did not pass.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ScfError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 input/config, 2 verification failure, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScfError::Config(_) | ScfError::Input(_) | ScfError::Io { .. } => 1,
            ScfError::Verification(_) => 2,
            ScfError::Training(_) => 3,
        }
    }
}
