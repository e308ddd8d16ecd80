use thiserror::Error;

/// Failures of a CLI run, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("tolerance check failed: {0}")]
    ToleranceFailure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] visilat::error::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ToleranceFailure(_) => 1,
            CliError::InvalidConfig(_) | CliError::Io { .. } | CliError::Library(_) => 2,
            CliError::UnsupportedField(_) => 3,
        }
    }
}
