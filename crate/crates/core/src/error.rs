use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("cochain is not a cocycle (max |d omega| = {residual:e})")]
    NotACocycle { residual: f64 },

    #[error("tangent vector leaves the algebra span (residual {residual:e})")]
    TangentDecomposition { residual: f64 },

    #[error("paths do not form a loop (endpoint distance {distance:e})")]
    NotALoop { distance: f64 },

    #[error("bounding surface does not match the loop (distance {distance:e})")]
    InvalidBoundingSurface { distance: f64 },

    #[error("chain is not closed: {0}")]
    OpenChain(String),

    #[error("user function failed: {0}")]
    UserFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedInput(msg.into())
}
