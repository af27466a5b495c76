//! CLI error kinds mapped to process exit codes.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values, or inconsistent command combinations.
    Config(String),
    /// Malformed or unreadable input data.
    Input(String),
    /// Arithmetic failure inside a computation.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl From<aligator::Error> for CliError {
    fn from(err: aligator::Error) -> Self {
        match err {
            aligator::Error::Domain(msg) => CliError::Config(msg),
            aligator::Error::Protocol(msg) | aligator::Error::Numerical(msg) => {
                CliError::Numerical(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
