//! Crate-wide error type.
//!
//! Configuration that is merely unphysical is reported through
//! [`crate::config::ValidationOutcome`], not through this enum; `Error` is for
//! conditions that prevent an operation from producing a result at all.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration text, unknown key, or unparseable value.
    #[error("config: {0}")]
    Config(String),

    /// Occupancy mask construction or parsing failure.
    #[error("mask: {0}")]
    Mask(String),

    /// Operands whose dimensions do not line up.
    #[error("shape: {0}")]
    Shape(String),

    /// Nothing usable to estimate from (all-zero input, empty spectrum).
    #[error("no data: {0}")]
    NoData(String),

    /// Solver could not run or produced non-finite values.
    #[error("solver: {0}")]
    Solver(String),

    /// Lambda selection could not be carried out.
    #[error("tuning: {0}")]
    Tuning(String),

    /// Invalid argument outside config parsing (bad grid, bad bin index).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
