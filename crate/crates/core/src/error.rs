use thiserror::Error;

/// Failures raised by the numerical pipeline.
///
/// Variants carry residuals where a tolerance decided the outcome, so callers
/// working with noisy inputs can see how far off they were.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contract violation: {what} (residual {residual:.3e})")]
    Contract { what: String, residual: f64 },

    #[error("numeric failure: {what} (residual {residual:.3e})")]
    Numeric { what: String, residual: f64 },

    #[error("structural error in {stage}: {what}")]
    Structural { stage: &'static str, what: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn contract(what: impl Into<String>, residual: f64) -> Self {
        Error::Contract {
            what: what.into(),
            residual,
        }
    }

    pub(crate) fn numeric(what: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            what: what.into(),
            residual,
        }
    }

    pub(crate) fn structural(stage: &'static str, what: impl Into<String>) -> Self {
        Error::Structural {
            stage,
            what: what.into(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Prefix non-structural messages with the pipeline stage that raised them.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Numeric { what, residual } => Error::Numeric {
                what: format!("{stage}: {what}"),
                residual,
            },
            Error::Contract { what, residual } => Error::Contract {
                what: format!("{stage}: {what}"),
                residual,
            },
            Error::Dimension(m) => Error::Dimension(format!("{stage}: {m}")),
            Error::Parameter(m) => Error::Parameter(format!("{stage}: {m}")),
            s @ Error::Structural { .. } => s,
        }
    }
}
