use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error classes. Each maps to a distinct process exit status in the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or unusable input data.
    #[error("input error: {0}")]
    Input(String),
    /// A required parameter is missing or out of range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Parameters are well formed but outside the formula's domain of validity.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request needs more memory or work than the implementation allows.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit status: 2 input, 3 parameter/domain, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::Parameter(_) | Error::Domain(_) => 3,
            Error::Resource(_) => 4,
        }
    }
}

pub(crate) fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}
