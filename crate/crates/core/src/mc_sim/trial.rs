use nalgebra::{DMatrix, SymmetricEigen};
use num::complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::haar::HaarDraw;
use super::rng::{Domain, DrawKind, StreamId};
use crate::capacity::capacity_from_gain;
use crate::error::{Error, Result};
use crate::gue_spectral::ChannelSpec;

/// How the overall amplifier gain is held fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerControl {
    /// Each section's log gains are centred, each trial's log gains are
    /// re-centred, and one calibrated dB offset gives the ensemble unit mean
    /// linear gain.
    #[default]
    Ensemble,
    /// Each trial is rescaled so its linear gains sum to `D`.
    PerTrial,
}

/// Per-section gain spread and the ensemble offset that realise a target `sigma_mdg`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub section_gain_db: f64,
    pub offset_db: f64,
    pub achieved_std_db: f64,
    pub iterations: usize,
}

impl Calibration {
    pub fn identity() -> Self {
        Self { section_gain_db: 0.0, offset_db: 0.0, achieved_std_db: 0.0, iterations: 0 }
    }
}

/// One channel realisation.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    /// Ascending.
    pub gains_db: Vec<f64>,
    pub capacities: Vec<f64>,
    pub total: f64,
    /// `sum_i lambda_i` in linear units.
    pub trace: f64,
}

/// Sorted modal gains (dB) of `H = prod_k U_k G_k` before any power control.
/// In the ensemble convention the result is re-centred to zero mean.
fn raw_gains(modes: usize, sections: usize, gain_db: f64, power: PowerControl, stream: &StreamId) -> Result<Vec<f64>> {
    let n = modes;
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        h[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let mut log_gains = vec![0.0; n];
    let mut amplitude = vec![0.0; n];
    for k in 0..sections as u64 {
        if gain_db > 0.0 {
            let mut rng = stream.rng(k, DrawKind::SectionGain);
            for x in log_gains.iter_mut() {
                *x = gain_db * rng.sample::<f64, _>(StandardNormal);
            }
            if power == PowerControl::Ensemble {
                let m = log_gains.iter().sum::<f64>() / n as f64;
                log_gains.iter_mut().for_each(|x| *x -= m);
            }
            for (a, x) in amplitude.iter_mut().zip(&log_gains) {
                *a = 10f64.powf(x / 20.0);
            }
            for c in 0..n {
                for (v, a) in h[c * n..(c + 1) * n].iter_mut().zip(&amplitude) {
                    *v *= a;
                }
            }
        }
        HaarDraw::sample(n, &mut stream.rng(k, DrawKind::Unitary)).apply(&mut h, n);
    }

    let hm = DMatrix::from_vec(n, n, h);
    let gram = &hm * hm.adjoint();
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
        .ok_or_else(|| Error::Trial(format!("eigendecomposition did not converge (trial {})", stream.trial)))?;
    let mut gains = Vec::with_capacity(n);
    for &l in eig.eigenvalues.iter() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Trial(format!("non-positive modal gain {l} (trial {})", stream.trial)));
        }
        gains.push(10.0 * l.log10());
    }
    gains.sort_by(f64::total_cmp);
    if power == PowerControl::Ensemble {
        let m = gains.iter().sum::<f64>() / n as f64;
        gains.iter_mut().for_each(|g| *g -= m);
    }
    Ok(gains)
}

/// Simulates one channel: `sections` blocks of (Haar unitary x diagonal gain),
/// power control, and the per-mode capacities.
pub fn run_trial(
    spec: &ChannelSpec,
    sections: usize,
    calibration: &Calibration,
    power: PowerControl,
    stream: &StreamId,
) -> Result<TrialOutcome> {
    let n = spec.modes;
    let mut gains = raw_gains(n, sections, calibration.section_gain_db, power, stream)?;
    match power {
        PowerControl::Ensemble => gains.iter_mut().for_each(|g| *g += calibration.offset_db),
        PowerControl::PerTrial => {
            let sum: f64 = gains.iter().map(|g| 10f64.powf(g / 10.0)).sum();
            let shift = 10.0 * (n as f64 / sum).log10();
            gains.iter_mut().for_each(|g| *g += shift);
        }
    }
    let trace = gains.iter().map(|g| 10f64.powf(g / 10.0)).sum();
    let snr = spec.snr_linear();
    let capacities: Vec<f64> = gains.iter().map(|&g| capacity_from_gain(g, snr)).collect();
    let total = capacities.iter().sum();
    Ok(TrialOutcome { gains_db: gains, capacities, total, trace })
}

/// Calibration trial count used when none is configured.
pub fn default_calibration_trials(modes: usize) -> usize {
    200usize.max(36_000usize.div_ceil(modes * modes))
}

struct Measurement {
    std_db: f64,
    offset_db: f64,
}

fn measure(spec: &ChannelSpec, sections: usize, trials: usize, gain_db: f64, power: PowerControl, seed: u64) -> Result<Measurement> {
    let per_trial: Vec<Result<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let stream = StreamId { seed, domain: Domain::Calibration, trial: t, bin: 0 };
            let mut g = raw_gains(spec.modes, sections, gain_db, power, &stream)?;
            if power == PowerControl::PerTrial {
                let sum: f64 = g.iter().map(|x| 10f64.powf(x / 10.0)).sum();
                let shift = 10.0 * (spec.modes as f64 / sum).log10();
                g.iter_mut().for_each(|x| *x += shift);
            }
            Ok(g)
        })
        .collect();
    // Calibration trials that fail are skipped; the ensemble run enforces the discard limit.
    let pooled: Vec<f64> = per_trial.into_iter().filter_map(|r| r.ok()).flatten().collect();
    if pooled.len() < 2 {
        return Err(Error::Trial("every calibration trial failed".into()));
    }
    let std_db = crate::stats::std_dev(&pooled);
    let offset_db = match power {
        PowerControl::Ensemble => {
            -10.0 * (pooled.iter().map(|g| 10f64.powf(g / 10.0)).sum::<f64>() / pooled.len() as f64).log10()
        }
        PowerControl::PerTrial => 0.0,
    };
    Ok(Measurement { std_db, offset_db })
}

pub const MAX_SECANT_STEPS: usize = 50;

/// Finds the per-section log-gain spread `g` (dB) whose ensemble log-gain
/// standard deviation matches `spec.sigma_mdg_db` within a relative `tol`.
/// Every secant step reuses the same random streams.
pub fn calibrate_section_gain(
    spec: &ChannelSpec,
    sections: usize,
    trials: usize,
    tol: f64,
    power: PowerControl,
    seed: u64,
) -> Result<Calibration> {
    let target = spec.sigma_mdg_db;
    if target == 0.0 {
        return Ok(Calibration::identity());
    }
    let rel = |m: &Measurement| m.std_db / target - 1.0;

    let mut g0 = target / (sections as f64).sqrt();
    let mut m0 = measure(spec, sections, trials, g0, power, seed)?;
    if rel(&m0).abs() <= tol {
        return Ok(Calibration { section_gain_db: g0, offset_db: m0.offset_db, achieved_std_db: m0.std_db, iterations: 1 });
    }
    let mut g1 = g0 * target / m0.std_db;
    for iteration in 2..=MAX_SECANT_STEPS {
        let m1 = measure(spec, sections, trials, g1, power, seed)?;
        log::debug!("calibration step {iteration}: g = {g1:.6} dB, std = {:.6} dB", m1.std_db);
        if rel(&m1).abs() <= tol {
            return Ok(Calibration {
                section_gain_db: g1,
                offset_db: m1.offset_db,
                achieved_std_db: m1.std_db,
                iterations: iteration,
            });
        }
        if iteration == MAX_SECANT_STEPS {
            return Err(Error::Calibration { iterations: iteration, last_std_db: m1.std_db });
        }
        let slope = (m1.std_db - m0.std_db) / (g1 - g0);
        let next = if slope > 0.0 && slope.is_finite() {
            g1 - (m1.std_db - target) / slope
        } else {
            g1 * target / m1.std_db
        };
        (g0, m0) = (g1, m1);
        g1 = next.clamp(0.25 * g0, 4.0 * g0);
    }
    unreachable!("secant loop returns on its last step")
}
