use std::ops::Range;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix market parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid CSR structure: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {required} bytes required, budget is {budget} bytes")]
    Capacity { required: u128, budget: u128 },

    #[error("preconditioner setup failed at row {row}: {reason}")]
    Preconditioner { row: usize, reason: &'static str },

    #[error("solver breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("vector `{name}` is not resident on the source store")]
    UnknownVector { name: &'static str },

    #[error("span {range:?} is out of bounds for vector `{name}` of length {len}")]
    SpanOutOfBounds {
        name: &'static str,
        range: Range<usize>,
        len: usize,
    },

    #[error("device {0} stopped before completing its queued work")]
    DeviceLost(&'static str),

    #[error("an earlier job on device {device} failed: {message}")]
    StreamFault {
        device: &'static str,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
