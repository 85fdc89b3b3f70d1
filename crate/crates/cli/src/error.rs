use std::fmt;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad configuration or unusable input files (exit 1).
    Usage(String),
    /// Reading or writing files (exit 1).
    Io(String),
    /// A computation failed or a check did not pass (exit 2).
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<phasefid::Error> for CliError {
    fn from(e: phasefid::Error) -> Self {
        match e {
            phasefid::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
