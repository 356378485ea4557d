use std::fmt;

/// Errors shared by every layer of the kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects built over incompatible grading groups or charts.
    ContextMismatch { expected: String, found: String },
    /// Bit-tuple lengths disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// Invalid construction data (duplicate names, zero degree for a formal
    /// coordinate, malformed assignment, ...).
    InvalidInput(String),
    /// A value fell outside the mathematically allowed range
    /// (truncation order above the session bound, non-invertible 1-jet, ...).
    Domain(String),
    /// Degree bookkeeping violated (non-homogeneous image, block mismatch).
    Degree(String),
    /// Matrix body is singular where an inverse was requested.
    SingularBody(String),
    /// The requested operation needs data that was not registered
    /// (derivative of an opaque function, exact inverse of a numeric map).
    Capability(String),
    /// Numeric evaluation failed (missing point coordinate, NaN, ...).
    Numeric(String),
    /// A section failed the compatibility condition on a named overlap.
    IncompatibleSection { pair: (String, String), detail: String },
    /// A construction's precondition check failed; the report names the cause.
    Rejected(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ContextMismatch { expected, found } => {
                write!(f, "context mismatch: expected {expected}, found {found}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Degree(msg) => write!(f, "degree error: {msg}"),
            Error::SingularBody(msg) => write!(f, "singular body: {msg}"),
            Error::Capability(msg) => write!(f, "capability error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::IncompatibleSection { pair, detail } => {
                write!(f, "incompatible section on overlap ({}, {}): {detail}", pair.0, pair.1)
            }
            Error::Rejected(msg) => write!(f, "precondition rejected: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
