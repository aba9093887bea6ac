//! Sample statistics used by the simulator and its consumers.

use crate::error::{Error, Result};
use crate::numerics::integrate;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Sample skewness `m3 / m2^1.5` (population moments).
pub fn skewness(xs: &[f64]) -> f64 {
    let (m2, m3, _) = central_moments(xs);
    m3 / m2.powf(1.5)
}

/// Excess kurtosis `m4 / m2^2 - 3` (population moments).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let (m2, _, m4) = central_moments(xs);
    m4 / (m2 * m2) - 3.0
}

fn central_moments(xs: &[f64]) -> (f64, f64, f64) {
    let m = mean(xs);
    let n = xs.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Pearson correlation matrix of the columns of `rows` (one row per sample).
pub fn correlation_matrix(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if rows.len() < 2 {
        return Err(Error::Domain("correlation needs at least two samples".into()));
    }
    let d = rows[0].len();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            let di = r[i] - means[i];
            for j in i..d {
                cov[i][j] += di * (r[j] - means[j]);
            }
        }
    }
    // Spreads at roundoff level count as zero.
    let negligible = |i: usize| !(cov[i][i] / n > (1e-12 * means[i].abs().max(1.0)).powi(2));
    if let Some(mode) = (0..d).find(|&i| negligible(i)) {
        return Err(Error::UndefinedCorrelation { mode: mode + 1 });
    }
    let mut rho = vec![vec![1.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let r = cov[i][j] / (cov[i][i] * cov[j][j]).sqrt();
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    Ok(rho)
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_sorted(&sorted, sorted.iter().map(|&x| cdf(x)))
}

/// KS distance against a density, integrating it between consecutive sorted
/// samples. `lower` must sit below the bulk of the mass.
pub fn ks_distance_to_density<F: Fn(f64) -> f64>(samples: &[f64], pdf: F, lower: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut cdf = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut prev = lower.min(sorted[0]);
    for &x in &sorted {
        acc += integrate(&pdf, prev, x, 1e-13)?;
        cdf.push(acc);
        prev = x;
    }
    Ok(ks_sorted(&sorted, cdf.into_iter()))
}

fn ks_sorted(sorted: &[f64], cdf: impl Iterator<Item = f64>) -> f64 {
    let n = sorted.len() as f64;
    cdf.enumerate().fold(0.0, |d, (k, f)| d.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs()))
}

/// Equal-width histogram over the sample range.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_samples(samples: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + width * k as f64 }).collect();
        let mut counts = vec![0; bins];
        for &x in samples {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }
}
