//! Error taxonomy shared by the whole crate.
//!
//! Three failure classes cover everything callers can hit: malformed input
//! (shape mismatches, out-of-range parameters, text that does not parse),
//! numerical breakdown (an iteration that did not converge inside its cap),
//! and requests for a closed form that does not exist for the given
//! source/rank combination. The last one is recoverable: callers fall back to
//! the sampling estimators.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Shape mismatches, out-of-range parameters, degenerate inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative scheme exceeded its iteration cap or produced
    /// non-finite intermediates.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested closed form does not exist; use the estimator path.
    #[error("no closed form: {0}")]
    NoClosedForm(String),

    /// Text input (CSV, descriptors) that does not parse.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn no_closed_form(msg: impl Into<String>) -> Self {
        Error::NoClosedForm(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
