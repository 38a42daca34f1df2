use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const CONVERGED: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const BREAKDOWN: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output encoding failed: {0}")]
    Encode(String),

    #[error(transparent)]
    Solver(#[from] hybrid_pipecg::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hybrid_pipecg::Error as E;
        match self {
            CliError::Solver(E::Breakdown { .. } | E::StreamFault { .. } | E::DeviceLost(_)) => {
                exit::BREAKDOWN
            }
            _ => exit::USAGE,
        }
    }
}
