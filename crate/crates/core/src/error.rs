use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

/// Coarse category used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Resource,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Input violates a documented precondition.
    Invalid(String),
    /// An iteration failed to converge or a quantity degenerated.
    Numerical(String),
    /// A configured size or iteration budget was exceeded.
    Resource(String),
    /// A Hermitian system was too ill-conditioned to solve. `witness` is a
    /// unit vector that (nearly) spans the numerical null space.
    IllConditioned { condition: f64, witness: Vec<Complex64> },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid(_) => ErrorKind::Validation,
            Error::Numerical(_) | Error::IllConditioned { .. } => ErrorKind::Numerical,
            Error::Resource(_) => ErrorKind::Resource,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
            Error::Resource(m) => write!(f, "resource limit: {m}"),
            Error::IllConditioned { condition, witness } => write!(
                f,
                "ill-conditioned system (condition {condition:.3e}, witness of length {})",
                witness.len()
            ),
        }
    }
}

impl core::error::Error for Error {}
