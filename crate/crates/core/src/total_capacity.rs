//! Total capacity as a correlated Gaussian sum of the per-mode capacities.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_from_gain, Method, PerModeStats};
use crate::error::{Error, Result};
use crate::gue_spectral::{mean_log_gain, ChannelSpec, StandardDensity};
use crate::numerics::{gaussian_pdf, inverse_erf};

/// Power of `sigma_mdg` in the correlation model.
pub const CORRELATION_EXPONENT: f64 = 2.75;

/// Empirical inter-mode capacity correlation
/// `rho_ij = e^-|i-j| + (e^-|i-j| - 1)(gamma0 + gamma1 sigma^2.75)`,
/// fitted for one `(D, SNR)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub gamma0: f64,
    pub gamma1: f64,
    pub exponent: f64,
    pub modes: usize,
    pub snr_db: f64,
}

impl CorrelationModel {
    pub fn new(gamma0: f64, gamma1: f64, modes: usize, snr_db: f64) -> Self {
        Self { gamma0, gamma1, exponent: CORRELATION_EXPONENT, modes, snr_db }
    }

    /// Published coefficients for six modes at 10 dB SNR.
    pub fn reference() -> Self {
        Self::new(0.43513127, 3.758373e-5, 6, 10.0)
    }

    /// `gamma0 + gamma1 sigma^2.75`.
    pub fn strength(&self, sigma_mdg_db: f64) -> f64 {
        self.gamma0 + self.gamma1 * sigma_mdg_db.powf(self.exponent)
    }

    /// Correlation between modes `i` and `j` (any consistent indexing).
    pub fn correlation(&self, i: usize, j: usize, sigma_mdg_db: f64) -> f64 {
        let decay = (-(i.abs_diff(j) as f64)).exp();
        decay + (decay - 1.0) * self.strength(sigma_mdg_db)
    }

    pub fn correlation_matrix(&self, sigma_mdg_db: f64) -> Vec<Vec<f64>> {
        (0..self.modes)
            .map(|i| (0..self.modes).map(|j| self.correlation(i, j, sigma_mdg_db)).collect())
            .collect()
    }
}

/// Gaussian summary of the total capacity over `n_bins` averaged frequency bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalCapacityStats {
    pub mu_ct: f64,
    pub sigma_ct: f64,
    pub mu_ct_exact: f64,
    pub n_bins: usize,
}

/// The total variance splits as `A + (A - B) s`, with `s` the model strength,
/// `A = sum s_i s_j e^-|i-j|` and `B = sum s_i s_j`. Returns `(A, B)`.
pub fn variance_parts(cap_sigmas: &[f64]) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for (i, si) in cap_sigmas.iter().enumerate() {
        for (j, sj) in cap_sigmas.iter().enumerate() {
            let p = si * sj;
            a += p * (-(i.abs_diff(j) as f64)).exp();
            b += p;
        }
    }
    (a, b)
}

/// `sigma_CT^2 = sum_ij sigma_i sigma_j rho_ij`, which may be non-positive
/// when the model is used outside its range.
pub fn total_variance(cap_sigmas: &[f64], model: &CorrelationModel, sigma_mdg_db: f64) -> f64 {
    let (a, b) = variance_parts(cap_sigmas);
    a + (a - b) * model.strength(sigma_mdg_db)
}

/// Total-capacity statistics for a single frequency bin.
pub fn total_stats(spec: &ChannelSpec, stats: &PerModeStats, model: &CorrelationModel) -> Result<TotalCapacityStats> {
    if model.modes != stats.modes {
        return Err(Error::ModelMismatch { model: model.modes, stats: stats.modes });
    }
    if (model.snr_db - spec.snr_db).abs() > 1e-9 {
        log::warn!(
            "correlation model fitted at {} dB SNR used at {} dB",
            model.snr_db,
            spec.snr_db
        );
    }
    let mu_ct = stats.total_mean();
    let sigma_ct = if stats.cap_sigmas.iter().all(|&s| s == 0.0) {
        0.0
    } else {
        let variance = total_variance(&stats.cap_sigmas, model, spec.sigma_mdg_db);
        if !(variance > 0.0) {
            return Err(Error::CorrelationOutOfRange { variance });
        }
        variance.sqrt()
    };
    let shape = stats.method.shape(stats.modes)?;
    let mu_ct_exact = exact_total_mean(spec, shape.as_ref())?;
    Ok(TotalCapacityStats { mu_ct, sigma_ct, mu_ct_exact, n_bins: 1 })
}

/// `D E[log2(1 + SNR 10^((sigma X + mu) / 10))]` for `X` drawn from `shape`.
pub fn exact_total_mean(spec: &ChannelSpec, shape: &dyn StandardDensity) -> Result<f64> {
    let snr = spec.snr_linear();
    let d = spec.modes as f64;
    if spec.is_degenerate() {
        return Ok(d * capacity_from_gain(0.0, snr));
    }
    let mu = mean_log_gain(spec, shape)?;
    let sigma = spec.sigma_mdg_db;
    Ok(d * shape.expect(&|x| capacity_from_gain(sigma * x + mu, snr), 1e-12)?)
}

/// Exact mean for `spec` with the model `method` resolves to.
pub fn exact_total_mean_for(spec: &ChannelSpec, method: Method) -> Result<f64> {
    exact_total_mean(spec, method.shape(spec.modes)?.as_ref())
}

/// Averages over `n` more independent bins: the mean is kept, the deviation
/// shrinks by `sqrt(n)`.
pub fn apply_frequency_diversity(stats: &TotalCapacityStats, n: usize) -> Result<TotalCapacityStats> {
    if n < 1 {
        return Err(Error::Domain("frequency bin count must be >= 1".into()));
    }
    Ok(TotalCapacityStats { sigma_ct: stats.sigma_ct / (n as f64).sqrt(), n_bins: stats.n_bins * n, ..*stats })
}

/// Capacity not reached with probability `p_out`: `sqrt(2) sigma erfinv(2 p - 1) + mu`.
pub fn outage_capacity(mu: f64, sigma: f64, p_out: f64) -> Result<f64> {
    if !(p_out > 0.0 && p_out < 1.0) {
        return Err(Error::Domain(format!("outage probability must be in (0, 1), got {p_out}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")));
    }
    Ok(std::f64::consts::SQRT_2 * sigma * inverse_erf(2.0 * p_out - 1.0)? + mu)
}

/// Gaussian density of the total capacity.
pub fn total_pdf(c: f64, stats: &TotalCapacityStats) -> Result<f64> {
    if stats.sigma_ct == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(gaussian_pdf(c, stats.mu_ct, stats.sigma_ct))
}

/// Peak height of the total-capacity density.
pub fn total_pdf_peak(stats: &TotalCapacityStats) -> f64 {
    1.0 / (stats.sigma_ct * (2.0 * PI).sqrt())
}

/// One record of the coefficient table file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    #[serde(rename = "D")]
    pub modes: usize,
    pub snr_db: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

impl From<CoefficientRecord> for CorrelationModel {
    fn from(r: CoefficientRecord) -> Self {
        CorrelationModel::new(r.gamma0, r.gamma1, r.modes, r.snr_db)
    }
}

impl From<&CorrelationModel> for CoefficientRecord {
    fn from(m: &CorrelationModel) -> Self {
        Self { modes: m.modes, snr_db: m.snr_db, gamma0: m.gamma0, gamma1: m.gamma1 }
    }
}

/// Fitted `(gamma0, gamma1)` pairs keyed by `(D, SNR)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientTable(pub Vec<CoefficientRecord>);

impl CoefficientTable {
    /// Table holding only the reference entry.
    pub fn builtin() -> Self {
        Self(vec![(&CorrelationModel::reference()).into()])
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn lookup(&self, modes: usize, snr_db: f64) -> Option<CorrelationModel> {
        self.0
            .iter()
            .rev()
            .find(|r| r.modes == modes && (r.snr_db - snr_db).abs() < 1e-9)
            .map(|&r| r.into())
    }

    /// Adds or replaces the entry for the model's `(D, SNR)`.
    pub fn upsert(&mut self, model: &CorrelationModel) {
        self.0.retain(|r| !(r.modes == model.modes && (r.snr_db - model.snr_db).abs() < 1e-9));
        self.0.push(model.into());
        self.0.sort_by(|a, b| a.modes.cmp(&b.modes).then(a.snr_db.total_cmp(&b.snr_db)));
    }
}
