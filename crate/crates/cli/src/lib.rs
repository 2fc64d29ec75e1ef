//! Experiment-runner library behind the `kagome-vqe` binary: configuration
//! parsing and the five subcommand pipelines.

pub mod commands;
pub mod config;

/// CLI failure classes, mapped to process exit codes: configuration problems
/// exit 2, numeric failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<kagome_vqe::Error> for CliError {
    fn from(e: kagome_vqe::Error) -> Self {
        match e {
            kagome_vqe::Error::Numeric(msg) => CliError::Numeric(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}
