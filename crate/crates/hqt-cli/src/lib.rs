//! Command implementations behind the `hqt` binary, exposed as a library so
//! the integration tests can drive them directly.

pub mod commands;
pub mod frozen;
pub mod pointfile;
pub mod report;
pub mod sampler;

use thiserror::Error;

/// Exit code for validation failures (a checked bound was exceeded).
pub const EXIT_CRITERION: i32 = 1;
/// Exit code for usage and parse errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data or parameters; maps to exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lib(#[from] hqt::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}
