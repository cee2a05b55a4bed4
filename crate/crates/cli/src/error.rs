use thiserror::Error;

/// Failures of a run, each mapped to its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical precondition failed: {0}")]
    Numerical(#[from] balanced_chaos::Error),

    #[error("acceptance assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Assertion(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}
