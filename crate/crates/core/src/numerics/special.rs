use std::f64::consts::PI;

use libm::{erf, erfc};

use crate::error::{Error, Result};

/// Inverse error function on `(-1, 1)`.
///
/// Starts from Giles' single-precision rational approximation and polishes
/// with Newton steps on `erf` (or `erfc` in the tails, where `1 - p` would
/// otherwise cancel).
pub fn inverse_erf(p: f64) -> Result<f64> {
    if !(p > -1.0 && p < 1.0) {
        return Err(Error::Domain(format!("inverse_erf needs -1 < p < 1, got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let sign = p.signum();
    let a = p.abs();
    let mut y = giles_initial(a);
    let slope = 2.0 / PI.sqrt();
    for _ in 0..4 {
        let residual = if a < 0.5 { erf(y) - a } else { (1.0 - a) - erfc(y) };
        let step = residual / (slope * (-y * y).exp());
        // Halley correction; erf'' = -2y erf'.
        let y_next = y - step / (1.0 + y * step);
        if (y_next - y).abs() <= 1e-16 * y.abs() {
            y = y_next;
            break;
        }
        y = y_next;
    }
    Ok(sign * y)
}

fn giles_initial(x: f64) -> f64 {
    let mut w = -((1.0 - x) * (1.0 + x)).ln();
    let p = if w < 5.0 {
        w -= 2.5;
        [
            3.43273939e-07,
            -3.5233877e-06,
            -4.39150654e-06,
            0.00021858087,
            -0.00125372503,
            -0.00417768164,
            0.246640727,
            1.50140941,
        ]
        .iter()
        .fold(2.81022636e-08, |p, &c| c + p * w)
    } else {
        w = w.sqrt() - 3.0;
        [
            0.000100950558,
            0.00134934322,
            -0.00367342844,
            0.00573950773,
            -0.0076224613,
            0.00943887047,
            1.00167406,
            2.83297682,
        ]
        .iter()
        .fold(-0.000200214257, |p, &c| c + p * w)
    };
    p * x
}

/// Standard normal quantile via the inverse error function.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    Ok(std::f64::consts::SQRT_2 * inverse_erf(2.0 * p - 1.0)?)
}
