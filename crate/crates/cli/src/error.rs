use thiserror::Error;

/// Failures of the command-line layer, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Core errors from file reads: I/O and parse failures map to exit 4, the rest to usage.
    pub fn from_core_io(e: graphcalc_core::Error) -> CliError {
        match e {
            graphcalc_core::Error::Io(m) | graphcalc_core::Error::Parse(m) => CliError::Io(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
