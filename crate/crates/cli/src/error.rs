use std::fmt;

use spdc_core::IoError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; nothing has been written.
    Validation(String),
    /// A solver or ensemble could not produce a trustworthy result.
    Numerical(String),
    /// The run completed but a built-in check failed.
    Check(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::NotNormalized { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}
