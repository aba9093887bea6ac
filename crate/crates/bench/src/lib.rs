//! Shared inputs for the criterion benches.

use sdmcap_core::mc_sim::{calibrate_section_gain, Domain, StreamId};
use sdmcap_core::total_capacity::total_variance;
use sdmcap_core::{per_mode_stats, Calibration, ChannelSpec, CorrelationModel, McConfig, Method, PowerControl};

pub const SNR_DB: f64 = 10.0;
pub const SIGMA_MDG_DB: f64 = 5.0;

pub fn spec(modes: usize) -> ChannelSpec {
    ChannelSpec::new(modes, SNR_DB, SIGMA_MDG_DB, 1).expect("valid bench spec")
}

pub fn stream(trial: u64) -> StreamId {
    StreamId { seed: 42, domain: Domain::Ensemble, trial, bin: 0 }
}

/// Calibration for `modes`, computed once per bench.
pub fn calibration(modes: usize) -> Calibration {
    calibrate_section_gain(&spec(modes), 100, 200, 0.01, PowerControl::Ensemble, 7).expect("calibration converges")
}

pub fn small_ensemble(modes: usize, trials: usize) -> McConfig {
    let mut config = McConfig::new(spec(modes));
    config.trials = trials;
    config.calibration_trials = Some(200);
    config
}

/// Reference variances from the analytic model with a known pair, so the fit
/// bench has an exact target.
pub fn synthetic_fit_target(modes: usize, grid: &[f64]) -> Vec<f64> {
    let model = CorrelationModel::new(0.3, 1e-4, modes, SNR_DB);
    grid.iter()
        .map(|&s| {
            let stats = per_mode_stats(&spec(modes).with_sigma(s), Method::Auto).expect("per-mode stats");
            total_variance(&stats.cap_sigmas, &model, s)
        })
        .collect()
}
