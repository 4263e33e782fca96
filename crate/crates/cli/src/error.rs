//! CLI error taxonomy mapped onto process exit codes:
//! 2 validation, 3 data, 4 internal.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}
