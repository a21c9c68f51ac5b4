use thiserror::Error;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two collections that must agree in length or dimension do not.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The call violates a contract of the operation (bad index, parameter regime, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// The request exceeds a supported size.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An iterative method failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            context,
            expected,
            got,
        }
    }
}
