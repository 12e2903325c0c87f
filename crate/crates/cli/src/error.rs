use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable or invalid input and flags.
pub const EXIT_INVALID: i32 = 2;
/// Exit status for an objective the order does not support.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] isorelabel::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) | CliError::Core(isorelabel::Error::RequiresLinear(_)) => {
                EXIT_MISMATCH
            }
            _ => EXIT_INVALID,
        }
    }
}
