use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} is outside the attainable range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("{what} did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    Numeric {
        what: String,
        estimate: f64,
        error_bound: f64,
    },

    #[error("feature unavailable: {0}")]
    FeatureUnavailable(String),

    #[error("no transition density: {0}")]
    NoDensity(String),

    #[error("outside the regime of validity: {0}")]
    Regime(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn unavailable(msg: impl Into<String>) -> Self {
        Error::FeatureUnavailable(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(x: f64, name: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {x}")))
    }
}
