use thiserror::Error;

use crate::total_capacity::CorrelationModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel spec: {0}")]
    InvalidSpec(String),

    #[error("GUE coefficients are only available for 2 <= D <= 8 (got D = {modes}); use the Wigner method")]
    UnsupportedOrder { modes: usize },

    #[error("sigma_mdg = 0 is a point mass; the density is undefined")]
    Degenerate,

    #[error("adaptive quadrature did not converge (best estimate {estimate})")]
    Quadrature { estimate: f64 },

    #[error("expected {expected} stationary points of the gain density, found {found}")]
    Localization { expected: usize, found: usize },

    #[error("no sign change in [{lower}, {upper}]")]
    NoBracket { lower: f64, upper: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("total-capacity variance {variance} is not positive; correlation model used outside its range")]
    CorrelationOutOfRange { variance: f64 },

    #[error("correlation model was fitted for D = {model}, statistics have D = {stats}")]
    ModelMismatch { model: usize, stats: usize },

    #[error("section-gain calibration did not converge after {iterations} secant steps (last std {last_std_db} dB)")]
    Calibration { iterations: usize, last_std_db: f64 },

    #[error("trial failed: {0}")]
    Trial(String),

    #[error("{discarded} of {trials} trials discarded (limit 1%)")]
    Ensemble { discarded: usize, trials: usize },

    #[error("mode {mode} has zero capacity variance; correlation undefined")]
    UndefinedCorrelation { mode: usize },

    #[error("no monotone correlation fit found (best non-monotone candidate gamma0 = {}, gamma1 = {}, msle = {msle})", best.gamma0, best.gamma1)]
    Fit { best: CorrelationModel, msle: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
