//! Scalar backends shared by the polynomial and operator algebra.
//!
//! Two field types implement [`Scalar`]: [`Complex64`] for floating-point work
//! (eigenvalues involving square roots of `g2`, continuation in complex `g2`)
//! and [`BigRational`] for exact identity checks. Everything in `diffop`,
//! `sl2`, `model` and `integral` is generic over the backend.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Relative tolerance used by the floating backend when a quantity is
/// compared against zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True for backends where `==` is mathematical equality.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Magnitude as a float, used for scales and tolerances.
    fn magnitude(&self) -> f64;

    fn to_complex(&self) -> Complex64;

    /// The value as an integer, when it is one exactly.
    fn as_integer(&self) -> Option<i64>;

    /// Parses a real number, either decimal (`0.25`, `-1e-3`) or a fraction (`3/4`).
    fn parse_real(s: &str) -> Result<Self, Error>;

    /// Zero test relative to `scale`. Exact for rationals.
    fn is_negligible(&self, scale: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= FLOAT_ZERO_TOL * scale.max(1.0)
        }
    }

    fn pow_usize(&self, exp: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn as_integer(&self) -> Option<i64> {
        if self.im == 0.0 && self.re.fract() == 0.0 && self.re.abs() < 9.0e15 {
            Some(self.re as i64)
        } else {
            None
        }
    }

    fn parse_real(s: &str) -> Result<Self, Error> {
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| Error::parse(s, "number"))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::parse(s, "number"))?;
            if d == 0.0 {
                return Err(Error::parse(s, "nonzero denominator"));
            }
            return Ok(Complex64::new(n / d, 0.0));
        }
        let v: f64 = s.trim().parse().map_err(|_| Error::parse(s, "number"))?;
        if !v.is_finite() {
            return Err(Error::parse(s, "finite number"));
        }
        Ok(Complex64::new(v, 0.0))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }

    fn parse_real(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| Error::parse(s, "integer numerator"))?;
            let d = BigInt::from_str(d.trim()).map_err(|_| Error::parse(s, "integer denominator"))?;
            if d.is_zero() {
                return Err(Error::parse(s, "nonzero denominator"));
            }
            return Ok(BigRational::new(n, d));
        }
        parse_decimal(s).ok_or_else(|| Error::parse(s, "decimal or fraction"))
    }
}

/// Exact decimal parsing: `-12.375e-2` becomes `-12375/100000`.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        for _ in 0..scale {
            value *= ten.clone();
        }
    } else {
        for _ in 0..(-scale) {
            value /= ten.clone();
        }
    }
    Some(if neg { -value } else { value })
}

/// Principal-branch complex power that keeps real data real.
///
/// A base with a zero imaginary part of either sign is treated as lying on the
/// upper side of the cut, so `-0.0` noise cannot flip the phase by `2πa`.
pub fn principal_pow(base: Complex64, exponent: Complex64) -> Complex64 {
    if exponent.is_zero() {
        return Complex64::one();
    }
    let base = if base.im == 0.0 { Complex64::new(base.re, 0.0) } else { base };
    if base.is_zero() {
        return Complex64::zero();
    }
    base.powc(exponent)
}
