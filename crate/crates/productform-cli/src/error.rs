use std::path::PathBuf;

use thiserror::Error;

/// Exit code on success.
pub const EXIT_OK: u8 = 0;
/// A verification or oracle comparison did not hold.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Malformed input, unknown family or invalid parameters.
pub const EXIT_INPUT: u8 = 2;
/// The graph is not strongly connected.
pub const EXIT_STRUCTURE: u8 = 3;
/// A size bound of the solver or an oracle was exceeded.
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Analysis(#[from] productform::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Analysis(e) => match e {
                productform::Error::InvalidArgument(_) => EXIT_INPUT,
                productform::Error::NotStronglyConnected { .. } => EXIT_STRUCTURE,
                productform::Error::ResourceLimit { .. } => EXIT_BUDGET,
                productform::Error::NumericFailure { .. } | productform::Error::Internal(_) => {
                    EXIT_CHECK_FAILED
                }
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Input(msg.into()))
}
