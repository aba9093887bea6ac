//! Exact polynomial algebra and the floating-point kernels shared by the
//! analytic modules.

mod polynomial;
mod quadrature;
mod roots;
mod special;

pub use polynomial::{hermite, RationalPolynomial};
pub(crate) use polynomial::{factorial, rational_to_f64};
pub use quadrature::{integrate, integrate_gaussian, MAX_DEPTH, TRUNCATION_SIGMAS};
pub use roots::{bisect, find_roots, DEFAULT_GRID_POINTS};
pub use special::{inverse_erf, normal_quantile};

/// Gaussian density with mean `mu` and deviation `sigma`.
pub fn gaussian_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}
