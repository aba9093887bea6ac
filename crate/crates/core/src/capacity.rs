//! Gain-to-capacity transformation and per-mode capacity statistics.

use std::f64::consts::{LN_10, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gue_spectral::{self, ChannelSpec, GainStats, StandardDensity, MAX_GUE_MODES};
use crate::numerics::{bisect, gaussian_pdf};
use crate::wigner::{self, SemicircleShape};

/// Requested spectral model. `Auto` picks GUE for `D <= 8`, Wigner above.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Auto,
    Gue,
    Wigner,
}

impl Method {
    /// Resolves `Auto` for a mode count. Never returns `Auto`.
    pub fn resolve(self, modes: usize) -> Method {
        match self {
            Method::Auto if modes <= MAX_GUE_MODES => Method::Gue,
            Method::Auto => Method::Wigner,
            m => m,
        }
    }

    /// Unit-variance density of the normalised log gain for this model.
    pub fn shape(self, modes: usize) -> Result<Box<dyn StandardDensity + Send + Sync>> {
        Ok(match self.resolve(modes) {
            Method::Gue => Box::new(gue_spectral::cached_coefficients(modes)?.shape()),
            _ => Box::new(SemicircleShape),
        })
    }
}

/// Per-mode gain and capacity statistics, modes in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerModeStats {
    pub modes: usize,
    pub method: Method,
    pub mu_lambda_db: f64,
    /// Empty for the Wigner method.
    pub gain_means_db: Vec<f64>,
    /// Empty for the Wigner method.
    pub gain_sigmas_db: Vec<f64>,
    pub cap_means: Vec<f64>,
    pub cap_sigmas: Vec<f64>,
}

impl PerModeStats {
    pub fn total_mean(&self) -> f64 {
        self.cap_means.iter().sum()
    }
}

/// `log2(1 + SNR 10^(lambda_dB / 10))`.
pub fn capacity_from_gain(lambda_db: f64, snr_linear: f64) -> f64 {
    (snr_linear * 10f64.powf(lambda_db / 10.0)).ln_1p() / LN_2
}

/// Inverse of [`capacity_from_gain`]; `-inf` at `c = 0`.
pub fn gain_from_capacity(c: f64, snr_linear: f64) -> f64 {
    10.0 * ((c * LN_2).exp_m1() / snr_linear).log10()
}

/// `d lambda_dB / dc`.
pub fn gain_jacobian(c: f64) -> f64 {
    let x = c * LN_2;
    10.0 / LN_10 * LN_2 / -(-x).exp_m1()
}

/// Density of the `i`-th (0-based) mode capacity: its Gaussian log gain
/// carried through the capacity map.
pub fn per_mode_capacity_pdf(c: f64, i: usize, gains: &GainStats, snr_linear: f64) -> f64 {
    if !(c > 0.0) {
        return 0.0;
    }
    gaussian_pdf(gain_from_capacity(c, snr_linear), gains.means_db[i], gains.sigmas_db[i]) * gain_jacobian(c)
}

/// Mode of the `i`-th capacity density, from the stationarity condition
/// `10 2^c (lambda(c) - mu) / (sigma^2 ln 10) + 1 = 0`.
pub fn per_mode_capacity_mean(i: usize, gains: &GainStats, snr_linear: f64) -> Result<f64> {
    let (mu, sigma) = (gains.means_db[i], gains.sigmas_db[i]);
    if sigma == 0.0 {
        return Ok(capacity_from_gain(mu, snr_linear));
    }
    let lo = capacity_from_gain(mu - 6.0 * sigma, snr_linear);
    let hi = capacity_from_gain(mu + 6.0 * sigma, snr_linear);
    let h = |c: f64| 10.0 * c.exp2() / (sigma * sigma * LN_10) * (gain_from_capacity(c, snr_linear) - mu) + 1.0;
    bisect(h, lo, hi, 1e-13)
}

/// `sigma_C,i = 1 / (sqrt(2 pi) f_C,i(mu_C,i))`.
pub fn per_mode_capacity_sigma(i: usize, gains: &GainStats, snr_linear: f64, mu_ci: f64) -> Result<f64> {
    if gains.sigmas_db[i] == 0.0 {
        return Ok(0.0);
    }
    let f = per_mode_capacity_pdf(mu_ci, i, gains, snr_linear);
    if !(f > 0.0) {
        return Err(Error::Domain(format!("capacity density of mode {} vanishes at its mode", i + 1)));
    }
    Ok(1.0 / ((2.0 * PI).sqrt() * f))
}

/// Per-mode statistics for `spec` using the requested model.
pub fn per_mode_stats(spec: &ChannelSpec, method: Method) -> Result<PerModeStats> {
    spec.validate()?;
    let resolved = method.resolve(spec.modes);
    let snr = spec.snr_linear();
    match resolved {
        Method::Gue => {
            let gains = gue_spectral::gain_stats(spec)?;
            let cap_means = (0..spec.modes)
                .map(|i| per_mode_capacity_mean(i, &gains, snr))
                .collect::<Result<Vec<_>>>()?;
            let cap_sigmas = cap_means
                .iter()
                .enumerate()
                .map(|(i, &m)| per_mode_capacity_sigma(i, &gains, snr, m))
                .collect::<Result<Vec<_>>>()?;
            Ok(PerModeStats {
                modes: spec.modes,
                method: resolved,
                mu_lambda_db: gains.mu_lambda_db,
                gain_means_db: gains.means_db,
                gain_sigmas_db: gains.sigmas_db,
                cap_means,
                cap_sigmas,
            })
        }
        _ => {
            let mu = gue_spectral::mean_log_gain(spec, &SemicircleShape)?;
            let cap_means = wigner::per_mode_means_from_cdf(spec, mu)?;
            let cap_sigmas = wigner::per_mode_sigmas_from_pdf(spec, mu, &cap_means)?;
            Ok(PerModeStats {
                modes: spec.modes,
                method: resolved,
                mu_lambda_db: mu,
                gain_means_db: Vec::new(),
                gain_sigmas_db: Vec::new(),
                cap_means,
                cap_sigmas,
            })
        }
    }
}
