use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("frame too short for this (chi={chi}, k_max={k_max}, l_max={l_max}): N={n} leaves no data symbols")]
    FrameTooShort {
        chi: u32,
        k_max: usize,
        l_max: usize,
        n: usize,
    },

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("path delay {delay} exceeds prefix length {prefix_len}")]
    DelayExceedsPrefix { delay: usize, prefix_len: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}
