//! Error types shared across the solver library.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller misuse: invalid ids, budgets, or parameters.
    #[error("usage error: {0}")]
    Usage(String),

    /// Instance text that cannot be parsed into a metric instance.
    #[error("parse error: {0}")]
    Parse(String),

    /// A configuration with no feasible solution (for example k = 0 with
    /// points left to cover).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A violated internal invariant; indicates a bug, never an input property.
    #[error("internal error: {what}\n{trace}")]
    Internal {
        /// Short description of the violated invariant.
        what: String,
        /// Dump of the relevant state for diagnosis.
        trace: String,
    },
}

impl Error {
    /// Convenience constructor for internal invariant violations.
    pub fn internal(what: impl Into<String>, trace: impl Into<String>) -> Self {
        Error::Internal { what: what.into(), trace: trace.into() }
    }
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
