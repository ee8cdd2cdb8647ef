use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` expects {expected} argument(s), got {found} (byte {offset})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },

    /// Expression evaluation failed (division by zero, log of a nonpositive value, ...).
    #[error("evaluation error at byte {offset}: {message}")]
    Eval { offset: usize, message: String },

    /// The curve crosses itself; Green's theorem does not apply.
    #[error("curve is not simple")]
    NonSimple,

    #[error("curve is not regular: minimum speed {min_speed:e}")]
    Irregular { min_speed: f64 },

    /// A finite-difference fundamental tensor failed the positive-definiteness check.
    #[error("fundamental tensor is not positive definite (det = {det:e})")]
    NotPositiveDefinite { det: f64 },

    /// A quadrature, search or root-find did not reach its tolerance.
    #[error("tolerance not reached: {0}")]
    Tolerance(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid curve data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
