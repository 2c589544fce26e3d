//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced by the expansion engine, the reference pricers, and the
/// batch front end.
#[derive(Debug, Error)]
pub enum LsvaError {
    /// A caller-supplied parameter or configuration value is outside the
    /// supported domain (bad model parameters, order above the cap,
    /// malformed run configuration, ...).
    #[error("invalid input: {message}")]
    InvalidInput {
        /// Human-readable description of the offending input.
        message: String,
    },

    /// A mathematically well-posed request was made at a point where the
    /// quantity is undefined (price outside the no-arbitrage interval,
    /// negative variance integral, expired option, ...).
    #[error("domain error: {message}")]
    Domain {
        /// Which bound or condition was violated.
        message: String,
    },

    /// An iterative scheme (series summation, quadrature refinement, root
    /// bracketing) failed to reach its tolerance within its budget.
    #[error("convergence failure: {message}")]
    Convergence {
        /// What was being computed and how far it got.
        message: String,
    },

    /// Output or configuration I/O failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A JSON document could not be parsed or serialized.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LsvaError {
    /// Shorthand constructor for [`LsvaError::InvalidInput`].
    pub fn invalid(message: impl Into<String>) -> Self {
        LsvaError::InvalidInput { message: message.into() }
    }

    /// Shorthand constructor for [`LsvaError::Domain`].
    pub fn domain(message: impl Into<String>) -> Self {
        LsvaError::Domain { message: message.into() }
    }

    /// Shorthand constructor for [`LsvaError::Convergence`].
    pub fn convergence(message: impl Into<String>) -> Self {
        LsvaError::Convergence { message: message.into() }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LsvaError>;
