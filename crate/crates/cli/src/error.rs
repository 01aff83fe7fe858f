use thiserror::Error;
use zrp_core::ZrpError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ZrpError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
    #[error("{0} acceptance check(s) failed")]
    Acceptance(usize),
}

impl CliError {
    /// Process exit code: 1 config, 2 runtime, 3 failed acceptance checks.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Model(_) | CliError::Io { .. } | CliError::Runtime(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
