//! Command implementations behind the `minlut` binary, exposed as a library
//! so integration tests can drive them directly.

pub mod commands;
pub mod config;

use std::fmt;

/// CLI failure classes; they map onto process exit codes (config errors
/// exit 1, runtime errors exit 2).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<minlut::Error> for CliError {
    fn from(e: minlut::Error) -> Self {
        match e {
            minlut::Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
