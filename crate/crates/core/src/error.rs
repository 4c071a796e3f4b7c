use crate::field::SpectralField;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two operands disagree on dimension, box size, viscosity or truncation.
    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A parameter lies outside the range where a formula is defined.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Exponential Gevrey weight exceeded the representable range.
    #[error("gevrey weight saturated at shell |k| = {shell:.6} (log-term {log_term:.3})")]
    Saturation { shell: f64, log_term: f64 },

    #[error("radius estimation failed: {0}")]
    Estimation(String),

    #[error("picard iteration did not converge; contraction ratios {ratios:?}")]
    Nonconvergence { ratios: Vec<f64> },

    /// Non-finite values appeared while stepping; carries the last finite state.
    #[error("numerical breakdown at t = {time}: {reason}")]
    Numerical {
        time: f64,
        reason: String,
        last_good: Option<Box<SpectralField>>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
