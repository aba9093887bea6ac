//! Fits the correlation-model coefficients to reference total-capacity
//! variances by minimising the mean squared log error.
//!
//! For fixed per-mode sigmas the model variance is linear in the strength
//! `s = gamma0 + gamma1 sigma^2.75`: `V = A + (A - B) s` (see
//! [`variance_parts`]). Phase one therefore pins `gamma0` in closed form at
//! the smallest grid point for any `gamma1`; phase two searches `gamma1`.

use serde::{Deserialize, Serialize};

use crate::capacity::{per_mode_stats, Method};
use crate::error::{Error, Result};
use crate::gue_spectral::ChannelSpec;
use crate::total_capacity::{variance_parts, CorrelationModel, CORRELATION_EXPONENT};

/// `gamma1` search bracket. Negative values are admitted: the Monte-Carlo
/// variances imply a correlation strength that is flat or falling with
/// `sigma_mdg` for most mode counts.
pub const GAMMA1_MIN: f64 = -1e-2;
pub const GAMMA1_MAX: f64 = 1e-2;
/// Objective evaluations allowed in the `gamma1` search.
pub const MAX_EVALUATIONS: usize = 10_000;
const COARSE_POINTS: usize = 2001;
/// Relative changes tried on `gamma0` when no anchored candidate is monotone.
const GAMMA0_CORRECTIONS: [f64; 8] = [1e-4, -1e-4, 1e-3, -1e-3, 1e-2, -1e-2, 5e-2, -5e-2];

/// Mean squared log error between two positive variance sequences.
pub fn msle(analytic: &[f64], reference: &[f64]) -> Result<f64> {
    if analytic.len() != reference.len() || analytic.is_empty() {
        return Err(Error::Domain("msle needs two non-empty sequences of equal length".into()));
    }
    let mut acc = 0.0;
    for (a, r) in analytic.iter().zip(reference) {
        if !(*a > 0.0 && *r > 0.0) {
            return Err(Error::Domain(format!("msle needs positive variances, got {a} and {r}")));
        }
        acc += (a.ln() - r.ln()).powi(2);
    }
    Ok(acc / analytic.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: CorrelationModel,
    pub msle: f64,
    /// Model variances on the fitting grid.
    pub analytic_vars: Vec<f64>,
    /// Best objective after each accepted improvement.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Parts {
    sigma: f64,
    a: f64,
    b: f64,
}

impl Parts {
    fn variance(&self, gamma0: f64, gamma1: f64) -> f64 {
        self.a + (self.a - self.b) * (gamma0 + gamma1 * self.sigma.powf(CORRELATION_EXPONENT))
    }
}

struct Problem<'a> {
    grid: Vec<Parts>,
    /// Grid plus midpoints, ascending.
    check: Vec<Parts>,
    reference: &'a [f64],
    evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    gamma0: f64,
    gamma1: f64,
    msle: f64,
    monotone: bool,
}

impl Problem<'_> {
    fn anchored_gamma0(&self, gamma1: f64) -> f64 {
        let p = self.grid[0];
        (self.reference[0] - p.a) / (p.a - p.b) - gamma1 * p.sigma.powf(CORRELATION_EXPONENT)
    }

    fn evaluate(&mut self, gamma0: f64, gamma1: f64) -> Candidate {
        self.evaluations += 1;
        let vars: Vec<f64> = self.grid.iter().map(|p| p.variance(gamma0, gamma1)).collect();
        let msle = msle(&vars, self.reference).unwrap_or(f64::INFINITY);
        let curve: Vec<f64> = self.check.iter().map(|p| p.variance(gamma0, gamma1)).collect();
        let monotone = curve.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9)) && curve[0] > 0.0;
        Candidate { gamma0, gamma1, msle, monotone }
    }

    fn anchored(&mut self, gamma1: f64) -> Candidate {
        let g0 = self.anchored_gamma0(gamma1);
        self.evaluate(g0, gamma1)
    }
}

fn penalised(c: &Candidate) -> f64 {
    if c.monotone {
        c.msle
    } else {
        f64::INFINITY
    }
}

/// Fits `(gamma0, gamma1)` so the model variances match `reference_vars` on
/// `sigma_grid` (ascending, at least three points). `cap_sigmas` returns the
/// per-mode capacity deviations at a given `sigma_mdg`.
pub fn fit_with(
    modes: usize,
    snr_db: f64,
    sigma_grid: &[f64],
    reference_vars: &[f64],
    cap_sigmas: &dyn Fn(f64) -> Result<Vec<f64>>,
) -> Result<FitReport> {
    if sigma_grid.len() < 3 || sigma_grid.len() != reference_vars.len() {
        return Err(Error::Domain("fit needs at least three grid points with matching reference variances".into()));
    }
    if !sigma_grid.windows(2).all(|w| w[1] > w[0]) || sigma_grid[0] <= 0.0 {
        return Err(Error::Domain("sigma grid must be positive and strictly ascending".into()));
    }
    if reference_vars.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("reference variances must be positive".into()));
    }
    let parts = |sigma: f64| -> Result<Parts> {
        let s = cap_sigmas(sigma)?;
        if s.len() != modes {
            return Err(Error::ModelMismatch { model: modes, stats: s.len() });
        }
        let (a, b) = variance_parts(&s);
        Ok(Parts { sigma, a, b })
    };
    let grid = sigma_grid.iter().map(|&s| parts(s)).collect::<Result<Vec<_>>>()?;
    let mut check = Vec::with_capacity(2 * grid.len() - 1);
    for (k, p) in grid.iter().enumerate() {
        if k > 0 {
            check.push(parts(0.5 * (sigma_grid[k - 1] + sigma_grid[k]))?);
        }
        check.push(*p);
    }
    let mut problem = Problem { grid, check, reference: reference_vars, evaluations: 0 };

    let mut history = Vec::new();
    let mut best: Option<Candidate> = None;
    let mut best_any: Option<Candidate> = None;
    let consider = |c: Candidate, best: &mut Option<Candidate>, best_any: &mut Option<Candidate>, history: &mut Vec<f64>| {
        if best_any.is_none_or(|b| c.msle < b.msle) {
            *best_any = Some(c);
        }
        if c.monotone && c.msle.is_finite() && best.is_none_or(|b| c.msle < b.msle) {
            *best = Some(c);
            history.push(c.msle);
        }
    };

    // Coarse scan of the bracket.
    let step = (GAMMA1_MAX - GAMMA1_MIN) / (COARSE_POINTS - 1) as f64;
    let at = |k: usize| GAMMA1_MIN + step * k as f64;
    let mut coarse = Vec::with_capacity(COARSE_POINTS);
    for k in 0..COARSE_POINTS {
        let c = problem.anchored(at(k));
        consider(c, &mut best, &mut best_any, &mut history);
        coarse.push(c);
    }

    // Golden-section refinement around the best admissible coarse point.
    if let Some(b) = best {
        let k = ((b.gamma1 - GAMMA1_MIN) / step).round() as usize;
        let mut lo = at(k.saturating_sub(1));
        let mut hi = at((k + 1).min(COARSE_POINTS - 1));
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut c1 = problem.anchored(x1);
        let mut c2 = problem.anchored(x2);
        consider(c1, &mut best, &mut best_any, &mut history);
        consider(c2, &mut best, &mut best_any, &mut history);
        while problem.evaluations < MAX_EVALUATIONS && hi - lo > 1e-15 * (GAMMA1_MAX - GAMMA1_MIN) {
            if penalised(&c1) <= penalised(&c2) {
                hi = x2;
                x2 = x1;
                c2 = c1;
                x1 = hi - ratio * (hi - lo);
                c1 = problem.anchored(x1);
                consider(c1, &mut best, &mut best_any, &mut history);
            } else {
                lo = x1;
                x1 = x2;
                c1 = c2;
                x2 = lo + ratio * (hi - lo);
                c2 = problem.anchored(x2);
                consider(c2, &mut best, &mut best_any, &mut history);
            }
        }
    } else {
        // No anchored candidate is monotone: nudge gamma0 on the coarse grid.
        'outer: for c in &coarse {
            for rel in GAMMA0_CORRECTIONS {
                if problem.evaluations >= MAX_EVALUATIONS {
                    break 'outer;
                }
                let g0 = c.gamma0 + rel * c.gamma0.abs().max(1e-3);
                let cand = problem.evaluate(g0, c.gamma1);
                consider(cand, &mut best, &mut best_any, &mut history);
            }
        }
    }

    match best {
        Some(b) => {
            let model = CorrelationModel::new(b.gamma0, b.gamma1, modes, snr_db);
            let analytic_vars = problem.grid.iter().map(|p| p.variance(b.gamma0, b.gamma1)).collect();
            Ok(FitReport { model, msle: b.msle, analytic_vars, history, evaluations: problem.evaluations })
        }
        None => {
            let b = best_any.expect("the coarse scan evaluates at least one candidate");
            Err(Error::Fit { best: CorrelationModel::new(b.gamma0, b.gamma1, modes, snr_db), msle: b.msle })
        }
    }
}

/// [`fit_with`] using the analytic per-mode deviations for `(modes, snr_db)`.
pub fn fit(modes: usize, snr_db: f64, sigma_grid: &[f64], reference_vars: &[f64], method: Method) -> Result<FitReport> {
    let provider = |sigma: f64| -> Result<Vec<f64>> {
        let spec = ChannelSpec::new(modes, snr_db, sigma, 1)?;
        Ok(per_mode_stats(&spec, method)?.cap_sigmas)
    };
    fit_with(modes, snr_db, sigma_grid, reference_vars, &provider)
}
