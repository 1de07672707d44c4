use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element of family `{found}` used with a `{expected}` monoid")]
    FamilyMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("scale violates the admissibility condition: {0}")]
    NotAdmissible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// A structural guarantee failed at run time (for example a kernel
    /// witness that should exist does not). Never silently skipped.
    #[error("internal consistency violation: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
