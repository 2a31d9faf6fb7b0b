use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KamError {
    #[error("elliptic modulus {0} outside [0, 1)")]
    InvalidModulus(f64),

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid forcing shape: {0}")]
    InvalidShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The integrator produced a non-finite state before the escape check
    /// could classify the orbit.
    #[error("numeric failure at t = {t}")]
    NumericFailure { t: f64 },

    #[error("{failed} of {total} orbits failed numerically")]
    CellFailed { failed: usize, total: usize },
}

impl KamError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        KamError::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        KamError::InvalidConfig(msg.into())
    }

    /// True for failures that come from the dynamics rather than from the
    /// caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            KamError::NumericFailure { .. } | KamError::CellFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, KamError>;
