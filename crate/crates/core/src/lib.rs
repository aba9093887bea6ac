//! Capacity statistics of space-division multiplexed links with strong mode
//! coupling and mode-dependent gain.
//!
//! The analytic path runs from the spectral density of the log modal gains
//! ([`gue_spectral`] for up to eight modes, [`wigner`] beyond) through
//! per-mode capacity statistics ([`capacity`]) to the Gaussian total capacity
//! ([`total_capacity`]). [`mc_sim`] is the Monte-Carlo reference and
//! [`gamma_fit`] tunes the correlation model against it.

pub mod capacity;
pub mod error;
pub mod gamma_fit;
pub mod gue_spectral;
pub mod mc_sim;
pub mod numerics;
pub mod stats;
pub mod total_capacity;
pub mod wigner;

pub use capacity::{per_mode_stats, Method, PerModeStats};
pub use error::{Error, Result};
pub use gamma_fit::{fit, FitReport};
pub use gue_spectral::{derive_coefficients, ChannelSpec, GueCoefficients, StandardDensity};
pub use mc_sim::{run_ensemble, Calibration, McConfig, McEnsembleResult, PowerControl};
pub use total_capacity::{CoefficientTable, CorrelationModel, TotalCapacityStats};
