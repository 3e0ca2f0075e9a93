//! Simulation and analysis of switched delay-line circulators.
//!
//! * [`signals`]: switch-control waveforms and their Fourier series.
//! * [`analytic`]: closed-form insertion loss, isolation and tone levels.
//! * [`components`]: switch, delay-line and matching-network models.
//! * [`engine`]: periodic steady-state circuit simulation of the full
//!   four-port circulator and S-parameter / spectrum extraction.

pub mod analytic;
pub mod components;
pub mod engine;
pub mod error;
pub mod signals;

pub use error::{Error, Result};
