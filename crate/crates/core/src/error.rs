use alloc::string::String;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (e.g. `Im z <= 0`).
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An iterative method failed to reach its tolerance.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::Error::InvalidParameter(alloc::format!($($arg)*)) };
}

pub(crate) use domain;
pub(crate) use invalid;
