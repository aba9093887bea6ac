//! Monte-Carlo multisection channel simulator used as the reference for the
//! analytic model.
//!
//! Each trial multiplies `K` sections, each a diagonal of random log gains
//! followed by a Haar unitary, and reads the modal gains off `H H^dagger`.
//! The per-section spread is calibrated so the ensemble log-gain standard
//! deviation equals the requested `sigma_mdg`.

mod haar;
mod rng;
mod trial;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use haar::{haar_unitary, HaarDraw};
pub use rng::{Domain, DrawKind, StreamId};
pub use trial::{
    calibrate_section_gain, default_calibration_trials, run_trial, Calibration, PowerControl, TrialOutcome,
    MAX_SECANT_STEPS,
};

use crate::error::{Error, Result};
use crate::gue_spectral::ChannelSpec;
use crate::stats::{self, Histogram};

/// Simulation settings. `spec.freq_bins` independent channels are averaged per trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub spec: ChannelSpec,
    pub sections: usize,
    pub trials: usize,
    pub seed: u64,
    /// Relative tolerance on the calibrated log-gain standard deviation.
    pub calibration_tol: f64,
    /// Defaults to [`default_calibration_trials`].
    pub calibration_trials: Option<usize>,
    pub power_control: PowerControl,
    pub histogram_bins: usize,
}

impl McConfig {
    pub fn new(spec: ChannelSpec) -> Self {
        Self {
            spec,
            sections: 100,
            trials: 100,
            seed: 0,
            calibration_tol: 0.01,
            calibration_trials: None,
            power_control: PowerControl::Ensemble,
            histogram_bins: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.sections < 1 || self.trials < 1 || self.histogram_bins < 1 {
            return Err(Error::InvalidSpec("section, trial and histogram bin counts must be >= 1".into()));
        }
        if !(self.calibration_tol > 0.0 && self.calibration_tol < 0.2) {
            return Err(Error::InvalidSpec(format!(
                "calibration tolerance must be in (0, 0.2), got {}",
                self.calibration_tol
            )));
        }
        if self.calibration_trials == Some(0) {
            return Err(Error::InvalidSpec("calibration trial count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn calibration_trials(&self) -> usize {
        self.calibration_trials.unwrap_or_else(|| default_calibration_trials(self.spec.modes))
    }
}

/// One trial, averaged over its frequency bins.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub gains_db: Vec<f64>,
    pub capacities: Vec<f64>,
    pub total: f64,
}

/// Ensemble statistics. Per-mode quantities pool every bin realisation; the
/// total-capacity samples are per-trial bin averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEnsembleResult {
    pub config: McConfig,
    pub calibration: Calibration,
    pub trials_used: usize,
    pub trials_discarded: usize,
    #[serde(rename = "per_mode_gain_mean_db")]
    pub per_mode_gain_mean: Vec<f64>,
    #[serde(rename = "per_mode_gain_std_db")]
    pub per_mode_gain_std: Vec<f64>,
    #[serde(rename = "per_mode_cap_mean_bits_per_s_per_hz")]
    pub per_mode_cap_mean: Vec<f64>,
    #[serde(rename = "per_mode_cap_std_bits_per_s_per_hz")]
    pub per_mode_cap_std: Vec<f64>,
    pub cap_correlation: Vec<Vec<f64>>,
    #[serde(rename = "gain_mean_db")]
    pub gain_mean: f64,
    #[serde(rename = "gain_std_db")]
    pub gain_std: f64,
    /// Extremes of the per-realisation linear trace `sum_i lambda_i`.
    pub trace_min: f64,
    pub trace_max: f64,
    #[serde(rename = "total_mean_bits_per_s_per_hz")]
    pub total_mean: f64,
    pub total_var: f64,
    #[serde(rename = "total_samples_bits_per_s_per_hz")]
    pub total_samples: Vec<f64>,
    pub gain_histogram: Histogram,
    pub cap_histograms: Vec<Histogram>,
    pub total_histogram: Histogram,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
    /// Every realisation's sorted gains (dB), bins included.
    #[serde(skip)]
    pub realisation_gains: Vec<Vec<f64>>,
}

impl McEnsembleResult {
    /// Pooled log gains of every realisation.
    pub fn pooled_gains(&self) -> Vec<f64> {
        self.realisation_gains.iter().flatten().copied().collect()
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// One row per trial: index, gains, capacities, total.
    pub fn write_trials_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.config.spec.modes;
        let mut header = vec!["trial_index".to_string()];
        header.extend((1..=d).map(|i| format!("gain_{i}_db")));
        header.extend((1..=d).map(|i| format!("capacity_{i}_bits_per_s_per_hz")));
        header.push("total_bits_per_s_per_hz".into());
        writeln!(w, "{}", header.join(","))?;
        for r in &self.records {
            let mut row = vec![r.index.to_string()];
            row.extend(r.gains_db.iter().chain(&r.capacities).map(|x| x.to_string()));
            row.push(r.total.to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Sample Pearson correlation of per-trial sorted per-mode capacities.
pub fn empirical_correlation(per_trial: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    stats::correlation_matrix(per_trial)
}

/// Calibrates and runs the ensemble.
pub fn run_ensemble(config: &McConfig) -> Result<McEnsembleResult> {
    config.validate()?;
    let cal = calibrate_section_gain(
        &config.spec,
        config.sections,
        config.calibration_trials(),
        config.calibration_tol,
        config.power_control,
        config.seed,
    )?;
    log::info!(
        "calibrated D = {}, sigma_mdg = {} dB: section gain {:.5} dB, offset {:.5} dB after {} steps",
        config.spec.modes,
        config.spec.sigma_mdg_db,
        cal.section_gain_db,
        cal.offset_db,
        cal.iterations
    );
    run_ensemble_with(config, &cal)
}

/// Runs the ensemble with a given calibration.
pub fn run_ensemble_with(config: &McConfig, cal: &Calibration) -> Result<McEnsembleResult> {
    config.validate()?;
    let spec = &config.spec;
    let bins = spec.freq_bins;
    let outcomes: Vec<Result<Vec<TrialOutcome>>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            (0..bins)
                .map(|b| {
                    let stream = StreamId { seed: config.seed, domain: Domain::Ensemble, trial: t as u64, bin: b as u64 };
                    run_trial(spec, config.sections, cal, config.power_control, &stream)
                })
                .collect()
        })
        .collect();

    let mut discarded = 0;
    let mut records = Vec::with_capacity(config.trials);
    let mut realisations: Vec<TrialOutcome> = Vec::with_capacity(config.trials * bins);
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(per_bin) => {
                records.push(average_bins(t, &per_bin));
                realisations.extend(per_bin);
            }
            Err(e) => {
                log::warn!("discarding trial {t}: {e}");
                discarded += 1;
            }
        }
    }
    if discarded * 100 > config.trials {
        return Err(Error::Ensemble { discarded, trials: config.trials });
    }
    if records.is_empty() {
        return Err(Error::Ensemble { discarded, trials: config.trials });
    }

    let d = spec.modes;
    let mut per_mode_gain_mean = Vec::with_capacity(d);
    let mut per_mode_gain_std = Vec::with_capacity(d);
    let mut per_mode_cap_mean = Vec::with_capacity(d);
    let mut per_mode_cap_std = Vec::with_capacity(d);
    let mut cap_histograms = Vec::with_capacity(d);
    for i in 0..d {
        let g: Vec<f64> = realisations.iter().map(|r| r.gains_db[i]).collect();
        let c: Vec<f64> = realisations.iter().map(|r| r.capacities[i]).collect();
        per_mode_gain_mean.push(stats::mean(&g));
        per_mode_gain_std.push(spread(&g));
        per_mode_cap_mean.push(stats::mean(&c));
        per_mode_cap_std.push(spread(&c));
        cap_histograms.push(Histogram::from_samples(&c, config.histogram_bins));
    }
    let cap_rows: Vec<Vec<f64>> = realisations.iter().map(|r| r.capacities.clone()).collect();
    let cap_correlation = if cap_rows.len() >= 2 {
        empirical_correlation(&cap_rows).unwrap_or_else(|e| {
            log::warn!("capacity correlation undefined: {e}");
            identity(d)
        })
    } else {
        identity(d)
    };

    let pooled: Vec<f64> = realisations.iter().flat_map(|r| r.gains_db.iter().copied()).collect();
    let total_samples: Vec<f64> = records.iter().map(|r| r.total).collect();
    let trace_min = realisations.iter().map(|r| r.trace).fold(f64::INFINITY, f64::min);
    let trace_max = realisations.iter().map(|r| r.trace).fold(f64::NEG_INFINITY, f64::max);

    Ok(McEnsembleResult {
        config: *config,
        calibration: *cal,
        trials_used: records.len(),
        trials_discarded: discarded,
        per_mode_gain_mean,
        per_mode_gain_std,
        per_mode_cap_mean,
        per_mode_cap_std,
        cap_correlation,
        gain_mean: stats::mean(&pooled),
        gain_std: spread(&pooled),
        trace_min,
        trace_max,
        total_mean: stats::mean(&total_samples),
        total_var: if total_samples.len() > 1 { stats::variance(&total_samples) } else { 0.0 },
        gain_histogram: Histogram::from_samples(&pooled, config.histogram_bins),
        cap_histograms,
        total_histogram: Histogram::from_samples(&total_samples, config.histogram_bins),
        total_samples,
        records,
        realisation_gains: realisations.into_iter().map(|r| r.gains_db).collect(),
    })
}

fn spread(xs: &[f64]) -> f64 {
    if xs.len() > 1 {
        stats::std_dev(xs)
    } else {
        0.0
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn average_bins(index: usize, per_bin: &[TrialOutcome]) -> TrialRecord {
    let n = per_bin.len() as f64;
    let d = per_bin[0].gains_db.len();
    let avg = |pick: fn(&TrialOutcome) -> &[f64]| -> Vec<f64> {
        (0..d).map(|i| per_bin.iter().map(|o| pick(o)[i]).sum::<f64>() / n).collect()
    };
    TrialRecord {
        index,
        gains_db: avg(|o| &o.gains_db),
        capacities: avg(|o| &o.capacities),
        total: per_bin.iter().map(|o| o.total).sum::<f64>() / n,
    }
}
