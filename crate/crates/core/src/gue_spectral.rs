//! Fixed-trace GUE spectral density of the logarithmic modal gains and the
//! per-mode Gaussian approximations built on it.
//!
//! Densities are handled in two forms. A [`StandardDensity`] is the zero-mean,
//! unit-variance shape `f~(x)`; the physical density of `lambda_dB` is
//! `f~((lambda_dB - mu) / sigma_mdg) / sigma_mdg`, with `mu` chosen by
//! [`mean_log_gain`] so that the linear gains have unit mean.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::OnceLock;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    self, factorial, find_roots, hermite, integrate_gaussian, rational_to_f64, RationalPolynomial,
    DEFAULT_GRID_POINTS,
};

pub const MIN_GUE_MODES: usize = 2;
pub const MAX_GUE_MODES: usize = 8;

/// Link parameters. SNR and MDG are carried in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub modes: usize,
    pub snr_db: f64,
    pub sigma_mdg_db: f64,
    pub freq_bins: usize,
}

impl ChannelSpec {
    pub fn new(modes: usize, snr_db: f64, sigma_mdg_db: f64, freq_bins: usize) -> Result<Self> {
        let spec = Self { modes, snr_db, sigma_mdg_db, freq_bins };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 {
            return Err(Error::InvalidSpec(format!("mode count must be >= 2, got {}", self.modes)));
        }
        if self.freq_bins < 1 {
            return Err(Error::InvalidSpec("frequency bin count must be >= 1".into()));
        }
        if !(self.sigma_mdg_db >= 0.0) || !self.sigma_mdg_db.is_finite() {
            return Err(Error::InvalidSpec(format!("sigma_mdg must be finite and >= 0, got {}", self.sigma_mdg_db)));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidSpec("SNR must be finite".into()));
        }
        Ok(())
    }

    /// The single dB-to-linear conversion point for the SNR.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_mdg_db == 0.0
    }

    pub fn with_sigma(&self, sigma_mdg_db: f64) -> Self {
        Self { sigma_mdg_db, ..*self }
    }
}

/// A zero-mean, unit-variance density of the normalised log gain.
pub trait StandardDensity {
    fn pdf(&self, x: f64) -> f64;

    /// `E[g(X)]` to an absolute tolerance of roughly `tol`.
    fn expect(&self, g: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64>;
}

/// Normalisation `alpha` and polynomial coefficients `beta_k` of the GUE
/// gain density `alpha * exp(-(D+1) x^2 / 2) * sum_k beta_k x^(2k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GueCoefficients {
    pub modes: usize,
    pub alpha: f64,
    pub beta: Vec<BigRational>,
}

impl GueCoefficients {
    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(rational_to_f64).collect()
    }

    /// Exact `alpha^2 = 2 (D + 1) / pi`, expressed as the rational factor of `1/pi`.
    fn alpha_sq_times_pi(modes: usize) -> BigRational {
        BigRational::from_integer(BigInt::from(2 * (modes + 1)))
    }

    /// `int x^(2k) alpha e^{-(D+1)x^2/2} dx / sum...` moment weights: the integral of
    /// `x^(2k)` against the normalised Gaussian factor is `(2k-1)!! / (D+1)^k`.
    fn gaussian_moment(modes: usize, k: usize) -> BigRational {
        let double_fact = factorial(2 * k) / (factorial(k) * (BigInt::one() << k));
        BigRational::new(double_fact, BigInt::from(modes + 1).pow(k as u32))
    }

    /// Exact area under the density. `alpha * sqrt(2 pi / (D+1)) = 2`, so this is rational.
    pub fn area_exact(&self) -> BigRational {
        let two = BigRational::from_integer(2.into());
        self.beta
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (k, b)| acc + b * Self::gaussian_moment(self.modes, k))
            * two
    }

    /// Exact second moment of the standardised density.
    pub fn variance_exact(&self) -> BigRational {
        let two = BigRational::from_integer(2.into());
        self.beta
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (k, b)| acc + b * Self::gaussian_moment(self.modes, k + 1))
            * two
    }

    /// Stationary-point polynomial in `u = (x - mu) / sigma`:
    /// `g'(u) - (D + 1) u g(u)` with `g(u) = sum_k beta_k u^(2k)`.
    pub fn stationary_polynomial(&self) -> RationalPolynomial {
        let g = RationalPolynomial::new(
            self.beta
                .iter()
                .enumerate()
                .flat_map(|(k, b)| {
                    let mut pair = vec![b.clone()];
                    if k + 1 < self.beta.len() {
                        pair.push(BigRational::zero());
                    }
                    pair
                })
                .collect(),
        );
        let u_times = RationalPolynomial::monomial(BigRational::from_integer(BigInt::from(self.modes + 1)), 1);
        &g.derivative() - &(&u_times * &g)
    }

    pub fn shape(&self) -> GueShape {
        GueShape { modes: self.modes, alpha: self.alpha, beta: self.beta_f64() }
    }

    pub fn to_cached(&self) -> CachedCoefficients {
        CachedCoefficients {
            alpha: format!("{}", self.alpha),
            beta: self.beta.iter().map(|b| b.to_string()).collect(),
        }
    }

    pub fn from_cached(modes: usize, cached: &CachedCoefficients) -> Result<Self> {
        let alpha = f64::from_str(&cached.alpha)
            .map_err(|e| Error::Domain(format!("bad alpha '{}' in coefficient cache: {e}", cached.alpha)))?;
        let beta = cached
            .beta
            .iter()
            .map(|s| {
                BigRational::from_str(s).map_err(|e| Error::Domain(format!("bad rational '{s}' in coefficient cache: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if beta.len() != modes {
            return Err(Error::Domain(format!("cache entry for D = {modes} has {} beta values", beta.len())));
        }
        Ok(Self { modes, alpha, beta })
    }
}

/// One entry of the on-disk coefficient cache: `alpha` as a decimal string,
/// `beta` as `"p/q"` rational strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedCoefficients {
    pub alpha: String,
    pub beta: Vec<String>,
}

/// Coefficient cache file contents, keyed by the mode count.
pub type CoefficientCache = BTreeMap<String, CachedCoefficients>;

/// Derives `alpha` and `beta` for a `D`-mode fixed-trace GUE.
///
/// The unit-variance one-point density is
/// `e^{-(D+1)l^2/2} sum_{k<D} H_k^2(t / (2 sqrt(D-1))) / (2^k k!)` with every
/// power `t^n` replaced by `(-1)^n H_n(l sqrt(D(D+1)/2))`. Only even powers of
/// `t` and of `l` survive, so the expansion stays rational. `alpha` is fixed
/// at `sqrt(2 (D+1) / pi)` and the rational normaliser is folded into `beta`.
pub fn derive_coefficients(modes: usize) -> Result<GueCoefficients> {
    if !(MIN_GUE_MODES..=MAX_GUE_MODES).contains(&modes) {
        return Err(Error::UnsupportedOrder { modes });
    }
    let d = modes;

    // sum_k H_k(u)^2 / (2^k k!) as a polynomial in u.
    let mut in_u = RationalPolynomial::zero();
    for k in 0..d {
        let h = hermite(k);
        let weight = BigRational::new(BigInt::one(), (BigInt::one() << k) * factorial(k));
        in_u = &in_u + &(&h * &h).scale(&weight);
    }
    debug_assert!(in_u.has_parity(true));

    // u = t / (2 sqrt(D-1)): u^(2m) = t^(2m) / (4 (D-1))^m.
    let inv_four_dm1 = BigRational::new(BigInt::one(), BigInt::from(4 * (d - 1)));
    let mut t_coeffs = Vec::with_capacity(in_u.coeffs().len());
    let mut factor = BigRational::one();
    for (n, c) in in_u.coeffs().iter().enumerate() {
        if n % 2 == 0 {
            t_coeffs.push(c * &factor);
            factor *= &inv_four_dm1;
        } else {
            t_coeffs.push(BigRational::zero());
        }
    }

    // t^n -> (-1)^n H_n(l s), s^2 = D(D+1)/2; n is even so the sign is +1.
    let s_sq = BigRational::new(BigInt::from(d * (d + 1)), BigInt::from(2));
    let mut in_l = RationalPolynomial::zero();
    for (n, c) in t_coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut scaled = Vec::with_capacity(n + 1);
        let mut s_pow = BigRational::one();
        for (j, h) in hermite(n).coeffs().iter().enumerate() {
            // Only even j are non-zero for even n.
            if j % 2 == 0 {
                scaled.push(h * &s_pow);
                s_pow *= &s_sq;
            } else {
                scaled.push(BigRational::zero());
            }
        }
        in_l = &in_l + &RationalPolynomial::new(scaled).scale(c);
    }
    debug_assert!(in_l.has_parity(true));

    let raw: Vec<BigRational> = (0..d).map(|k| in_l.coeff(2 * k)).collect();
    let unnormalised = GueCoefficients { modes: d, alpha: 0.0, beta: raw };
    let area = unnormalised.area_exact();
    let beta = unnormalised.beta.iter().map(|b| b / &area).collect();

    let alpha = (rational_to_f64(&GueCoefficients::alpha_sq_times_pi(d)) / PI).sqrt();
    Ok(GueCoefficients { modes: d, alpha, beta })
}

/// Process-wide memo of [`derive_coefficients`]. Values are deterministic, so
/// racing initialisers are harmless.
pub fn cached_coefficients(modes: usize) -> Result<&'static GueCoefficients> {
    static CACHE: [OnceLock<GueCoefficients>; MAX_GUE_MODES - MIN_GUE_MODES + 1] =
        [const { OnceLock::new() }; MAX_GUE_MODES - MIN_GUE_MODES + 1];
    if !(MIN_GUE_MODES..=MAX_GUE_MODES).contains(&modes) {
        return Err(Error::UnsupportedOrder { modes });
    }
    let slot = &CACHE[modes - MIN_GUE_MODES];
    if let Some(c) = slot.get() {
        return Ok(c);
    }
    let derived = derive_coefficients(modes)?;
    Ok(slot.get_or_init(|| derived))
}

/// Floating-point form of the standardised GUE density.
#[derive(Clone, Debug)]
pub struct GueShape {
    modes: usize,
    alpha: f64,
    beta: Vec<f64>,
}

impl GueShape {
    pub fn modes(&self) -> usize {
        self.modes
    }
}

impl StandardDensity for GueShape {
    fn pdf(&self, x: f64) -> f64 {
        let x2 = x * x;
        let poly = self.beta.iter().rev().fold(0.0, |acc, &b| acc * x2 + b);
        self.alpha * (-0.5 * (self.modes + 1) as f64 * x2).exp() * poly
    }

    fn expect(&self, g: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let scale = 1.0 / ((self.modes + 1) as f64).sqrt();
        integrate_gaussian(|x| g(x) * self.pdf(x), 0.0, scale, tol)
    }
}

const EXPECTATION_TOL: f64 = 1e-13;

/// Mean log gain `mu` (dB) that gives the linear gains unit mean:
/// `mu = -10 log10 E[10^(sigma X / 10)]` for `X` drawn from `shape`.
pub fn mean_log_gain(spec: &ChannelSpec, shape: &dyn StandardDensity) -> Result<f64> {
    if spec.is_degenerate() {
        return Ok(0.0);
    }
    let sigma = spec.sigma_mdg_db;
    let linear_mean = shape.expect(&|x| 10f64.powf(sigma * x / 10.0), EXPECTATION_TOL)?;
    Ok(-10.0 * linear_mean.log10())
}

/// GUE density of `lambda_dB` at `x` for mean `mu_lambda_db`.
pub fn ensemble_pdf(x: f64, spec: &ChannelSpec, coeffs: &GueCoefficients, mu_lambda_db: f64) -> Result<f64> {
    if spec.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let sigma = spec.sigma_mdg_db;
    Ok(coeffs.shape().pdf((x - mu_lambda_db) / sigma) / sigma)
}

/// Per-mode Gaussian parameters of the ordered log gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainStats {
    pub mu_lambda_db: f64,
    pub means_db: Vec<f64>,
    pub sigmas_db: Vec<f64>,
}

/// Stationary points of the standardised density in `[-4, 4]`, ascending.
/// Fails unless exactly `2D - 1` are found, after one grid refinement.
pub fn stationary_points(coeffs: &GueCoefficients) -> Result<Vec<f64>> {
    let q = coeffs.stationary_polynomial().to_f64_coeffs();
    let eval = |u: f64| q.iter().rev().fold(0.0, |acc, &c| acc * u + c);
    let expected = 2 * coeffs.modes - 1;
    let mut found = 0;
    for grid in [DEFAULT_GRID_POINTS, 4 * DEFAULT_GRID_POINTS] {
        let roots = find_roots(eval, -4.0, 4.0, grid, 1e-14);
        if roots.len() == expected {
            return Ok(roots);
        }
        found = roots.len();
    }
    Err(Error::Localization { expected, found })
}

/// Local maxima of the ensemble density (odd-indexed stationary points), in dB.
pub fn per_mode_means(spec: &ChannelSpec, coeffs: &GueCoefficients, mu_lambda_db: f64) -> Result<Vec<f64>> {
    if coeffs.modes != spec.modes {
        return Err(Error::InvalidSpec(format!(
            "coefficients are for D = {}, spec has D = {}",
            coeffs.modes, spec.modes
        )));
    }
    if spec.is_degenerate() {
        return Ok(vec![0.0; spec.modes]);
    }
    let roots = stationary_points(coeffs)?;
    Ok(roots.iter().step_by(2).map(|u| mu_lambda_db + spec.sigma_mdg_db * u).collect())
}

/// `sigma_i = 1 / (D sqrt(2 pi) f(mu_i))`.
pub fn per_mode_sigmas(
    spec: &ChannelSpec,
    coeffs: &GueCoefficients,
    mu_lambda_db: f64,
    means_db: &[f64],
) -> Result<Vec<f64>> {
    let d = spec.modes as f64;
    means_db
        .iter()
        .map(|&m| {
            let f = ensemble_pdf(m, spec, coeffs, mu_lambda_db)?;
            if !(f > 0.0) {
                return Err(Error::Domain(format!("gain density vanishes at per-mode mean {m} dB")));
            }
            Ok(1.0 / (d * (2.0 * PI).sqrt() * f))
        })
        .collect()
}

/// Gaussian approximation of the `i`-th (0-based) ordered gain density.
pub fn per_mode_pdf(x: f64, i: usize, stats: &GainStats) -> f64 {
    numerics::gaussian_pdf(x, stats.means_db[i], stats.sigmas_db[i])
}

/// Full GUE-track gain statistics for `spec`.
pub fn gain_stats(spec: &ChannelSpec) -> Result<GainStats> {
    let coeffs = cached_coefficients(spec.modes)?;
    if spec.is_degenerate() {
        return Ok(GainStats {
            mu_lambda_db: 0.0,
            means_db: vec![0.0; spec.modes],
            sigmas_db: vec![0.0; spec.modes],
        });
    }
    let mu = mean_log_gain(spec, &coeffs.shape())?;
    let means_db = per_mode_means(spec, coeffs, mu)?;
    let sigmas_db = per_mode_sigmas(spec, coeffs, mu, &means_db)?;
    Ok(GainStats { mu_lambda_db: mu, means_db, sigmas_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn spec(d: usize, sigma: f64) -> ChannelSpec {
        ChannelSpec::new(d, 10.0, sigma, 1).unwrap()
    }

    #[test]
    fn six_mode_coefficients_are_exact() {
        let c = derive_coefficients(6).unwrap();
        assert_eq!(
            c.beta,
            vec![q(322, 3125), q(4557, 1250), q(-17493, 625), q(256221, 3125), q(-259308, 3125), q(453789, 15625)]
        );
        assert!((c.alpha - (14.0 / PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_area_and_variance_exact() {
        for d in MIN_GUE_MODES..=MAX_GUE_MODES {
            let c = derive_coefficients(d).unwrap();
            assert_eq!(c.area_exact(), BigRational::one(), "area, D = {d}");
            assert_eq!(c.variance_exact(), BigRational::one(), "variance, D = {d}");
            // Cross-check by quadrature.
            let shape = c.shape();
            let area = integrate(|x| shape.pdf(x), -15.0, 15.0, 1e-12).unwrap();
            let var = integrate(|x| x * x * shape.pdf(x), -15.0, 15.0, 1e-12).unwrap();
            assert!((area - 1.0).abs() < 1e-8 && (var - 1.0).abs() < 1e-8, "D = {d}");
        }
    }

    #[test]
    fn two_mode_density() {
        let c = derive_coefficients(2).unwrap();
        assert_eq!(c.beta, vec![q(0, 1), q(3, 2)]);
    }

    #[test]
    fn unsupported_orders() {
        for d in [0, 1, 9, 20] {
            assert!(matches!(derive_coefficients(d), Err(Error::UnsupportedOrder { .. })));
        }
    }

    #[test]
    fn deterministic_derivation() {
        assert_eq!(derive_coefficients(7).unwrap(), derive_coefficients(7).unwrap());
        assert_eq!(cached_coefficients(7).unwrap(), &derive_coefficients(7).unwrap());
    }

    #[test]
    fn cache_entry_round_trip() {
        let c = derive_coefficients(8).unwrap();
        let back = GueCoefficients::from_cached(8, &c.to_cached()).unwrap();
        assert_eq!(back, c);
        let mut bad = c.to_cached();
        bad.beta[0] = "1/x".into();
        assert!(GueCoefficients::from_cached(8, &bad).is_err());
    }

    #[test]
    fn mean_log_gain_six_modes() {
        let c = cached_coefficients(6).unwrap();
        let mu = mean_log_gain(&spec(6, 5.0), &c.shape()).unwrap();
        assert!((mu + 2.609).abs() < 0.002, "mu = {mu}");
        assert_eq!(mean_log_gain(&spec(6, 0.0), &c.shape()).unwrap(), 0.0);
    }

    #[test]
    fn density_normalised_and_symmetric() {
        let s = spec(6, 5.0);
        let c = cached_coefficients(6).unwrap();
        let mu = mean_log_gain(&s, &c.shape()).unwrap();
        let area = integrate(|x| ensemble_pdf(x, &s, c, mu).unwrap(), mu - 100.0, mu + 100.0, 1e-11).unwrap();
        assert!((area - 1.0).abs() < 1e-8);
        let lin = integrate(|x| 10f64.powf(x / 10.0) * ensemble_pdf(x, &s, c, mu).unwrap(), mu - 100.0, mu + 100.0, 1e-11)
            .unwrap();
        assert!((lin - 1.0).abs() < 1e-6);
        let var =
            integrate(|x| (x - mu).powi(2) * ensemble_pdf(x, &s, c, mu).unwrap(), mu - 100.0, mu + 100.0, 1e-10).unwrap();
        assert!((var - 25.0).abs() < 1e-6 * 25.0);
        for d in [0.3, 1.7, 4.2, 9.9] {
            let (a, b) = (ensemble_pdf(mu + d, &s, c, mu).unwrap(), ensemble_pdf(mu - d, &s, c, mu).unwrap());
            assert_eq!(a, b);
        }
        assert!(matches!(ensemble_pdf(0.0, &spec(6, 0.0), c, 0.0), Err(Error::Degenerate)));
    }

    #[test]
    fn stationary_points_count_and_maxima() {
        for d in MIN_GUE_MODES..=MAX_GUE_MODES {
            let c = cached_coefficients(d).unwrap();
            let roots = stationary_points(c).unwrap();
            assert_eq!(roots.len(), 2 * d - 1);
            let q = c.stationary_polynomial();
            let dq = q.derivative();
            for (k, &u) in roots.iter().enumerate() {
                assert!(q.eval(u).abs() < 1e-8);
                // Sign of f'' at a stationary point is the sign of q'.
                let curvature = dq.eval(u);
                if k % 2 == 0 {
                    assert!(curvature < 0.0, "D = {d}, root {k} is not a maximum");
                } else {
                    assert!(curvature > 0.0);
                }
            }
        }
    }

    #[test]
    fn six_mode_density_has_six_maxima() {
        let s = spec(6, 5.0);
        let c = cached_coefficients(6).unwrap();
        let mu = mean_log_gain(&s, &c.shape()).unwrap();
        let h = 1e-4;
        let slope = |x: f64| (ensemble_pdf(x + h, &s, c, mu).unwrap() - ensemble_pdf(x - h, &s, c, mu).unwrap()) / (2.0 * h);
        let roots = find_roots(slope, mu - 20.0, mu + 20.0, 4096, 1e-10);
        let maxima = roots.iter().filter(|&&x| slope(x - 1e-3) > 0.0).count();
        assert_eq!(maxima, 6);
    }

    #[test]
    fn per_mode_gain_stats_six_modes() {
        let s = spec(6, 5.0);
        let g = gain_stats(&s).unwrap();
        assert!(g.means_db.windows(2).all(|w| w[0] < w[1]));
        for i in 0..6 {
            let j = 5 - i;
            assert!(((g.means_db[i] - g.mu_lambda_db) + (g.means_db[j] - g.mu_lambda_db)).abs() < 1e-9);
            assert!((g.sigmas_db[i] - g.sigmas_db[j]).abs() < 1e-9);
            assert!(g.sigmas_db[i] > 0.0);
        }
        assert!(g.sigmas_db[0] > g.sigmas_db[2]);
    }

    #[test]
    fn mixture_matches_ensemble_at_means() {
        let s = spec(6, 5.0);
        let c = cached_coefficients(6).unwrap();
        let g = gain_stats(&s).unwrap();
        for (i, &m) in g.means_db.iter().enumerate() {
            let own = per_mode_pdf(m, i, &g) / 6.0;
            assert!((own - ensemble_pdf(m, &s, c, g.mu_lambda_db).unwrap()).abs() < 1e-12);
            assert!((per_mode_pdf(m, i, &g) - 1.0 / (g.sigmas_db[i] * (2.0 * PI).sqrt())).abs() < 1e-12);
        }
        // Total variation between the Gaussian mixture and the ensemble.
        let tv = 0.5
            * integrate(
                |x| {
                    let mix: f64 = (0..6).map(|i| per_mode_pdf(x, i, &g)).sum::<f64>() / 6.0;
                    (mix - ensemble_pdf(x, &s, c, g.mu_lambda_db).unwrap()).abs()
                },
                g.mu_lambda_db - 60.0,
                g.mu_lambda_db + 60.0,
                1e-9,
            )
            .unwrap();
        assert!(tv < 0.05, "tv = {tv}");
    }

    #[test]
    fn spec_validation() {
        assert!(ChannelSpec::new(1, 10.0, 5.0, 1).is_err());
        assert!(ChannelSpec::new(4, 10.0, -1.0, 1).is_err());
        assert!(ChannelSpec::new(4, 10.0, 1.0, 0).is_err());
        assert!((spec(4, 1.0).snr_linear() - 10.0).abs() < 1e-12);
    }
}
