use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant names the operation that failed so that callers (and the
/// command-line front end) can report it without extra context.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{op}: argument out of domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: could not bracket a solution ({detail})")]
    Range { op: &'static str, detail: String },

    #[error("{op}: not supported for {what}")]
    Unsupported { op: &'static str, what: String },

    #[error("{op}: accuracy target not met (achieved error estimate {achieved:.3e}, target {target:.3e})")]
    Accuracy {
        op: &'static str,
        achieved: f64,
        target: f64,
    },

    #[error("{op}: inversion produced {value:.3e}, below the error estimate {estimate:.3e}")]
    InversionFailure {
        op: &'static str,
        value: f64,
        estimate: f64,
    },

    #[error("conjugate: exponent is not special ({detail})")]
    NotSpecial { detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn range(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn unsupported(op: &'static str, what: impl Into<String>) -> Self {
        Error::Unsupported { op, what: what.into() }
    }

    /// Re-label an accuracy failure raised by a helper with the caller's name.
    pub(crate) fn within(self, op: &'static str) -> Self {
        match self {
            Error::Accuracy { achieved, target, .. } => Error::Accuracy { op, achieved, target },
            other => other,
        }
    }
}
