//! Semicircle (large-D) model of the log gains and the capacity statistics
//! derived from its closed-form CDF.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::capacity::{capacity_from_gain, gain_from_capacity, gain_jacobian};
use crate::error::{Error, Result};
use crate::gue_spectral::{ChannelSpec, StandardDensity};
use crate::numerics::{bisect, integrate};

/// Bisection tolerance on capacity when inverting the CDF.
pub const QUANTILE_TOL: f64 = 1e-12;

/// Unit-variance semicircle on `[-2, 2]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SemicircleShape;

impl StandardDensity for SemicircleShape {
    fn pdf(&self, x: f64) -> f64 {
        if x.abs() >= 2.0 {
            0.0
        } else {
            (4.0 - x * x).sqrt() / (2.0 * PI)
        }
    }

    fn expect(&self, g: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64> {
        // x = 2 sin(t) turns the square-root edges into a smooth weight.
        integrate(|t| {
            let c = t.cos();
            g(2.0 * t.sin()) * 2.0 / PI * c * c
        }, -FRAC_PI_2, FRAC_PI_2, tol)
    }
}

/// Semicircle density of `lambda_dB` with half-width `2 sigma_mdg`.
pub fn semicircle_pdf(x: f64, sigma_mdg_db: f64, mu_lambda_db: f64) -> f64 {
    SemicircleShape.pdf((x - mu_lambda_db) / sigma_mdg_db) / sigma_mdg_db
}

/// Capacity support `[c_min, c_max]` implied by the gain support.
pub fn support(spec: &ChannelSpec, mu_lambda_db: f64) -> (f64, f64) {
    let snr = spec.snr_linear();
    let half = 2.0 * spec.sigma_mdg_db;
    (capacity_from_gain(mu_lambda_db - half, snr), capacity_from_gain(mu_lambda_db + half, snr))
}

/// Ensemble capacity density: the semicircle carried through `C = log2(1 + SNR 10^(lambda/10))`.
pub fn capacity_pdf(c: f64, spec: &ChannelSpec, mu_lambda_db: f64) -> f64 {
    let (lo, hi) = support(spec, mu_lambda_db);
    if !(c > lo && c < hi) {
        return 0.0;
    }
    let snr = spec.snr_linear();
    semicircle_pdf(gain_from_capacity(c, snr), spec.sigma_mdg_db, mu_lambda_db) * gain_jacobian(c)
}

/// Closed-form CDF of the ensemble capacity, clamped outside the support.
pub fn capacity_cdf(c: f64, spec: &ChannelSpec, mu_lambda_db: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let w = ((gain_from_capacity(c, spec.snr_linear()) - mu_lambda_db) / (2.0 * spec.sigma_mdg_db)).clamp(-1.0, 1.0);
    (0.5 + (w * (1.0 - w * w).sqrt() + w.asin()) / PI).clamp(0.0, 1.0)
}

/// `mu_C,i = F^-1((i - 1/2) / D)`, ascending.
pub fn per_mode_means_from_cdf(spec: &ChannelSpec, mu_lambda_db: f64) -> Result<Vec<f64>> {
    if spec.is_degenerate() {
        return Ok(vec![capacity_from_gain(mu_lambda_db, spec.snr_linear()); spec.modes]);
    }
    let (lo, hi) = support(spec, mu_lambda_db);
    let d = spec.modes as f64;
    (1..=spec.modes)
        .map(|i| {
            let target = (i as f64 - 0.5) / d;
            bisect(|c| capacity_cdf(c, spec, mu_lambda_db) - target, lo, hi, QUANTILE_TOL)
        })
        .collect()
}

/// `sigma_C,i = 1 / (D sqrt(2 pi) f_C(mu_C,i))`.
pub fn per_mode_sigmas_from_pdf(spec: &ChannelSpec, mu_lambda_db: f64, means: &[f64]) -> Result<Vec<f64>> {
    if spec.is_degenerate() {
        return Ok(vec![0.0; means.len()]);
    }
    let d = spec.modes as f64;
    means
        .iter()
        .map(|&m| {
            let f = capacity_pdf(m, spec, mu_lambda_db);
            if f > 0.0 {
                Ok(1.0 / (d * (2.0 * PI).sqrt() * f))
            } else {
                Err(Error::Domain(format!("capacity density vanishes at {m}")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gue_spectral::mean_log_gain;

    fn spec(d: usize, sigma: f64) -> ChannelSpec {
        ChannelSpec::new(d, 10.0, sigma, 1).unwrap()
    }

    #[test]
    fn semicircle_moments() {
        let (s, mu) = (5.0, -1.3);
        assert!((semicircle_pdf(mu, s, mu) - 1.0 / (PI * s)).abs() < 1e-15);
        let area = integrate(|x| semicircle_pdf(x, s, mu), mu - 2.0 * s, mu + 2.0 * s, 1e-12).unwrap();
        let var = integrate(|x| (x - mu).powi(2) * semicircle_pdf(x, s, mu), mu - 2.0 * s, mu + 2.0 * s, 1e-12).unwrap();
        assert!((area - 1.0).abs() < 1e-10);
        assert!((var - s * s).abs() < 1e-8);
        assert_eq!(semicircle_pdf(mu + 2.0 * s + 1e-9, s, mu), 0.0);
    }

    #[test]
    fn shape_expectation_uses_smooth_weight() {
        let sc = SemicircleShape;
        assert!((sc.expect(&|_| 1.0, 1e-13).unwrap() - 1.0).abs() < 1e-12);
        assert!((sc.expect(&|x| x * x, 1e-13).unwrap() - 1.0).abs() < 1e-12);
        // Fourth moment of the unit semicircle is 2.
        assert!((sc.expect(&|x| x.powi(4), 1e-13).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_endpoints_and_midpoint() {
        let s = spec(20, 5.0);
        let mu = mean_log_gain(&s, &SemicircleShape).unwrap();
        let (lo, hi) = support(&s, mu);
        assert!((lo - capacity_from_gain(mu - 10.0, 10.0)).abs() < 1e-15);
        assert_eq!(capacity_cdf(lo, &s, mu), 0.0);
        assert_eq!(capacity_cdf(hi, &s, mu), 1.0);
        assert!((capacity_cdf(capacity_from_gain(mu, 10.0), &s, mu) - 0.5).abs() < 1e-12);
        let area = integrate(|c| capacity_pdf(c, &s, mu), lo, hi, 1e-11).unwrap();
        assert!((area - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let s = spec(20, 5.0);
        let mu = mean_log_gain(&s, &SemicircleShape).unwrap();
        let (lo, hi) = support(&s, mu);
        let mut acc = 0.0;
        let mut prev = lo;
        for k in 1..=1000 {
            let c = lo + (hi - lo) * k as f64 / 1000.0;
            acc += integrate(|x| capacity_pdf(x, &s, mu), prev, c, 1e-13).unwrap();
            prev = c;
            assert!((acc - capacity_cdf(c, &s, mu)).abs() < 1e-8, "c = {c}");
        }
    }

    #[test]
    fn cdf_monotone_and_derivative_is_pdf() {
        let s = spec(16, 4.0);
        let mu = mean_log_gain(&s, &SemicircleShape).unwrap();
        let (lo, hi) = support(&s, mu);
        let mut prev = 0.0;
        for k in 0..=10_000 {
            let f = capacity_cdf(lo + (hi - lo) * k as f64 / 10_000.0, &s, mu);
            assert!(f >= prev);
            prev = f;
        }
        let h = 1e-6;
        for k in 1..50 {
            let c = lo + (hi - lo) * k as f64 / 50.0;
            let fd = (capacity_cdf(c + h, &s, mu) - capacity_cdf(c - h, &s, mu)) / (2.0 * h);
            assert!((fd - capacity_pdf(c, &s, mu)).abs() < 1e-5);
        }
    }

    #[test]
    fn quantile_means() {
        for d in [9, 12, 20] {
            let s = spec(d, 5.0);
            let mu = mean_log_gain(&s, &SemicircleShape).unwrap();
            let means = per_mode_means_from_cdf(&s, mu).unwrap();
            assert!(means.windows(2).all(|w| w[0] < w[1]));
            for (i, &m) in means.iter().enumerate() {
                let target = (i as f64 + 0.5) / d as f64;
                assert!((capacity_cdf(m, &s, mu) - target).abs() < 1e-10);
            }
            // Mapped back to gains, quantiles are symmetric about mu.
            for i in 0..d {
                let a = gain_from_capacity(means[i], 10.0) - mu;
                let b = gain_from_capacity(means[d - 1 - i], 10.0) - mu;
                assert!((a + b).abs() < 1e-8);
            }
            if d % 2 == 1 {
                assert!((capacity_cdf(means[d / 2], &s, mu) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_modes_widest() {
        let s = spec(20, 5.0);
        let mu = mean_log_gain(&s, &SemicircleShape).unwrap();
        let means = per_mode_means_from_cdf(&s, mu).unwrap();
        let sig = per_mode_sigmas_from_pdf(&s, mu, &means).unwrap();
        assert!(sig.iter().all(|&x| x > 0.0));
        let interior_max = sig[1..19].iter().cloned().fold(0.0, f64::max);
        assert!(sig[19] > interior_max);
    }
}
