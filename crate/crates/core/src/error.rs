use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented invariant or precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frequency {freq_hz} Hz is outside the sampled range [{min_hz}, {max_hz}] Hz")]
    OutOfRange { freq_hz: f64, min_hz: f64, max_hz: f64 },

    #[error("degenerate network: {0}")]
    Degenerate(String),

    #[error("kernel truncation: {fraction:.3e} of the impulse-response energy falls outside {n_taps} taps")]
    Truncation { fraction: f64, n_taps: usize },

    #[error("phase unwrapping is ambiguous between points {index} and {next} (|dphi| = {dphi:.3} rad)")]
    UnwrapAmbiguous { index: usize, next: usize, dphi: f64 },

    #[error("simulation unstable: {0}")]
    Unstable(String),

    #[error("simulation did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("touchstone {path}: line {line}: {reason}")]
    Touchstone { path: PathBuf, line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors raised while running a simulation (as opposed to bad input).
    pub fn is_simulation_abort(&self) -> bool {
        matches!(self, Error::Unstable(_) | Error::NotConverged { .. })
    }
}
