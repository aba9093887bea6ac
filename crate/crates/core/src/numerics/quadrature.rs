//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Maximum bisection depth of the adaptive recursion.
pub const MAX_DEPTH: usize = 60;

/// Number of equal panels the interval is split into before adapting. A
/// single 3-point Simpson estimate can miss a narrow peak entirely.
const INITIAL_PANELS: usize = 32;

/// Half-width, in units of the dominant Gaussian scale, used to truncate
/// infinite integration bounds.
pub const TRUNCATION_SIGMAS: f64 = 40.0;

/// Integrates `f` over `[lower, upper]` to an absolute error of about `tol`.
///
/// Infinite bounds must be truncated by the caller; see [`integrate_gaussian`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !lower.is_finite() || !upper.is_finite() {
        return Err(Error::Domain("quadrature bounds must be finite".into()));
    }
    if lower == upper {
        return Ok(0.0);
    }
    if lower > upper {
        return integrate(f, upper, lower, tol).map(|v| -v);
    }

    let h = (upper - lower) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut converged = true;
    for p in 0..INITIAL_PANELS {
        let a = lower + h * p as f64;
        let b = if p + 1 == INITIAL_PANELS { upper } else { a + h };
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        let mut state = Panel { f: &f, converged: true, floor: panel_tol };
        total += state.refine(a, b, fa, fm, fb, whole, panel_tol, MAX_DEPTH);
        converged &= state.converged;
    }
    if !total.is_finite() || !converged {
        return Err(Error::Quadrature { estimate: total });
    }
    Ok(total)
}

/// Integrates over `center ± 40 * scale`, standing in for the whole real line
/// when the integrand carries a Gaussian factor of width `scale`.
pub fn integrate_gaussian<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, tol: f64) -> Result<f64> {
    let half = TRUNCATION_SIGMAS * scale;
    integrate(f, center - half, center + half, tol)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct Panel<'a, F> {
    f: &'a F,
    converged: bool,
    /// Contribution below which an unresolvable interval is harmless.
    floor: f64,
}

impl<F: Fn(f64) -> f64> Panel<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        // Once the interval is narrower than the float spacing, agreement is
        // meaningless; only accept it if its whole contribution is negligible.
        if depth == 0 || lm <= a || rm >= b {
            if (left + right).abs() > self.floor {
                self.converged = false;
            }
            return left + right + delta / 15.0;
        }
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
