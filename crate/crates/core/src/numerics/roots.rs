//! Grid-scan root bracketing with bisection refinement.

use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 4096;

/// All roots of `f` in `[lower, upper]` that show up as sign changes (or exact
/// zeros) on a uniform grid of `grid_points` nodes, in ascending order.
///
/// Each bracket is bisected until `|f| <= tol` or its width is `<= tol`.
/// Roots of even multiplicity that do not change sign are not reported.
pub fn find_roots<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, grid_points: usize, tol: f64) -> Vec<f64> {
    assert!(grid_points >= 2, "find_roots needs at least two grid points");
    let step = (upper - lower) / (grid_points - 1) as f64;
    let node = |i: usize| if i + 1 == grid_points { upper } else { lower + step * i as f64 };

    let mut roots = Vec::new();
    let mut x_prev = node(0);
    let mut f_prev = f(x_prev);
    if f_prev == 0.0 {
        roots.push(x_prev);
    }
    for i in 1..grid_points {
        let x = node(i);
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && (f_prev < 0.0) != (fx < 0.0) {
            roots.push(bisect_bracket(&f, x_prev, x, f_prev, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

/// Bisection on a known bracket. Errors if `f(lower)` and `f(upper)` share a sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, tol: f64) -> Result<f64> {
    let (fl, fu) = (f(lower), f(upper));
    if fl == 0.0 {
        return Ok(lower);
    }
    if fu == 0.0 {
        return Ok(upper);
    }
    if !(fl.is_finite() && fu.is_finite()) || (fl < 0.0) == (fu < 0.0) {
        return Err(Error::NoBracket { lower, upper });
    }
    Ok(bisect_bracket(&f, lower, upper, fl, tol))
}

fn bisect_bracket<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    loop {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m <= a.min(b) || m >= a.max(b) {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 || fm.abs() <= tol {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}
