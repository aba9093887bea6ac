//! Dense univariate polynomials with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

/// Polynomial `sum_k c[k] x^k` over the rationals.
///
/// Trailing zero coefficients are always stripped, so the zero polynomial has
/// an empty coefficient vector and `degree() == None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^power`.
    pub fn monomial(c: BigRational, power: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^power` (zero past the degree).
    pub fn coeff(&self, power: usize) -> BigRational {
        self.coeffs.get(power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// `self(inner(x))`, by Horner's scheme.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c.clone());
        }
        acc
    }

    /// `self(c * x)`.
    pub fn rescale_argument(&self, c: &BigRational) -> Self {
        let mut factor = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &factor);
            factor *= c;
        }
        Self::new(out)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Floating-point evaluation. Coefficients are rounded once to `f64`.
    pub fn eval(&self, x: f64) -> f64 {
        self.to_f64_coeffs().iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// True when every coefficient whose power has the wrong parity is zero.
    pub fn has_parity(&self, even: bool) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| (k % 2 == 0) == even || c.is_zero())
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn add(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn sub(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn mul(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPolynomial::new(out)
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn neg(self) -> RationalPolynomial {
        RationalPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}

/// Physicist's Hermite polynomial `H_n`, from the explicit sum
/// `n! * sum_{k=0}^{floor(n/2)} (-1)^k (2x)^(n-2k) / (k! (n-2k)!)`.
pub fn hermite(n: usize) -> RationalPolynomial {
    let mut coeffs = vec![BigRational::zero(); n + 1];
    let n_fact = factorial(n);
    for k in 0..=n / 2 {
        let power = n - 2 * k;
        let mut term = &n_fact / (factorial(k) * factorial(power)) * (BigInt::one() << power);
        if k % 2 == 1 {
            term = -term;
        }
        coeffs[power] = BigRational::from_integer(term);
    }
    RationalPolynomial::new(coeffs)
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0), RationalPolynomial::from_integers(&[1]));
        assert_eq!(hermite(1), RationalPolynomial::from_integers(&[0, 2]));
        assert_eq!(hermite(2), RationalPolynomial::from_integers(&[-2, 0, 4]));
        assert_eq!(hermite(3), RationalPolynomial::from_integers(&[0, -12, 0, 8]));
    }

    #[test]
    fn hermite_recurrence_and_parity() {
        let x2 = RationalPolynomial::from_integers(&[0, 2]);
        for n in 1..32 {
            let lhs = hermite(n + 1);
            let rhs = &(&x2 * &hermite(n)) - &hermite(n - 1).scale(&q(2 * n as i64, 1));
            assert_eq!(lhs, rhs, "recurrence fails at n = {n}");
            assert!(hermite(n).has_parity(n % 2 == 0));
        }
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        let p = RationalPolynomial::new(vec![q(1, 2), q(0, 1), q(0, 1)]);
        assert_eq!(p.degree(), Some(0));
        let zero = &p - &p;
        assert!(zero.is_zero());
        assert_eq!(zero.degree(), None);
    }

    #[test]
    fn compose_and_derivative() {
        // (x + 1)^2 = x^2 + 2x + 1
        let square = RationalPolynomial::from_integers(&[0, 0, 1]);
        let shift = RationalPolynomial::from_integers(&[1, 1]);
        assert_eq!(square.compose(&shift), RationalPolynomial::from_integers(&[1, 2, 1]));
        assert_eq!(
            hermite(3).derivative(),
            hermite(2).scale(&q(6, 1)),
            "H_n' = 2n H_(n-1)"
        );
        let p = RationalPolynomial::new(vec![q(1, 3), q(-2, 5), q(7, 2)]);
        assert_eq!(p.rescale_argument(&q(2, 1)), p.compose(&RationalPolynomial::from_integers(&[0, 2])));
        assert_eq!(p.eval_exact(&q(1, 2)), q(1, 3) - q(1, 5) + q(7, 8));
        assert!((p.eval(0.5) - (1.0 / 3.0 - 0.2 + 7.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::from(10).pow(400u32), BigInt::from(3) * BigInt::from(10).pow(398u32));
        assert!((rational_to_f64(&big) - 100.0 / 3.0).abs() < 1e-9);
    }
}
