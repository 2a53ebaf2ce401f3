//! Command-line pipeline over the `glossotree` library.

mod cli;
pub mod compare;
pub mod config;
pub mod fixture;
pub mod inputs;
pub mod pipeline;
pub mod plot;
pub mod validate;

pub use cli::run;

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Bad or missing input; exit code 1.
    #[error("{0}")]
    Input(String),
    /// A broken internal invariant; exit code 2.
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}
