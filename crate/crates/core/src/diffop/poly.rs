//! Dense univariate polynomials in τ.
//!
//! Coefficients are stored in ascending degree order. The representation is
//! canonical: trailing coefficients that are exactly zero are removed, so the
//! zero polynomial has an empty coefficient vector and `degree() == None`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The variable τ.
    pub fn tau() -> Self {
        Self::from_coeffs(vec![S::zero(), S::one()])
    }

    /// `c·τ^deg`.
    pub fn monomial(c: S, deg: usize) -> Self {
        let mut coeffs = vec![S::zero(); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        let mut p = Poly { coeffs };
        p.normalize();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| S::from_i64(c)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[S]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| {
            acc * Self::from_coeffs(vec![-r.clone(), S::one()])
        })
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * S::from_i64(i as i64))
                .collect(),
        )
    }

    /// The `k`-th derivative.
    pub fn derivative_n(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c.to_complex())
    }

    /// Synthetic division by `(τ - root)`: returns quotient and remainder.
    pub fn div_linear(&self, root: &S) -> (Self, S) {
        if self.coeffs.is_empty() {
            return (Self::zero(), S::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![S::zero(); n - 1];
        let mut carry = S::zero();
        for i in (0..n).rev() {
            let v = self.coeffs[i].clone() + carry.clone() * root.clone();
            if i == 0 {
                return (Self::from_coeffs(q), v);
            }
            q[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[d].clone();
        let mut rem = self.coeffs.clone();
        let Some(top) = self.degree().filter(|&t| t >= d) else {
            return (Self::zero(), self.clone());
        };
        let mut q = vec![S::zero(); top - d + 1];
        for i in (d..=top).rev() {
            let c = rem[i].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            for j in 0..=d {
                rem[i - d + j] = rem[i - d + j].clone() - c.clone() * divisor.coeffs[j].clone();
            }
            rem[i] = S::zero();
            q[i - d] = c;
        }
        (Self::from_coeffs(q), Self::from_coeffs(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            Some(l) => {
                let inv = S::one() / l.clone();
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    /// Keeps only the terms of degree `> n`.
    pub fn above_degree(&self, n: usize) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i > n { c.clone() } else { S::zero() })
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> Poly<Complex64> {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c.to_complex()).collect())
    }

    /// Coefficient-wise comparison: exact for rationals, relative to the
    /// larger coefficient norm for floats.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let diff = self.clone() - other.clone();
        if S::EXACT {
            return diff.is_zero();
        }
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        diff.max_abs() <= rel_tol * scale
    }
}

impl<S: Scalar> Add for Poly<S> {
    type Output = Poly<S>;

    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<S: Scalar> Sub for Poly<S> {
    type Output = Poly<S>;

    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<S: Scalar> Neg for Poly<S> {
    type Output = Poly<S>;

    fn neg(self) -> Self {
        Poly::from_coeffs(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<S: Scalar> Mul for Poly<S> {
    type Output = Poly<S>;

    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;

    fn mul(self, rhs: Self) -> Poly<S> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(out)
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c:?})")?,
                1 => write!(f, "({c:?})·τ")?,
                _ => write!(f, "({c:?})·τ^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn trailing_zeros_are_normalized() {
        let p = Poly::from_coeffs(vec![q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Poly::<Q>::from_coeffs(vec![q(0, 1)]).degree(), None);
    }

    #[test]
    fn derivative_of_tau_squared() {
        let p = Poly::<Q>::monomial(q(1, 1), 2);
        assert_eq!(p.derivative(), Poly::from_i64(&[0, 2]));
    }

    #[test]
    fn division_by_linear_factor() {
        let p = Poly::<Q>::from_roots(&[q(1, 2), q(-3, 1), q(2, 1)]);
        let (quot, rem) = p.div_linear(&q(-3, 1));
        assert!(rem.is_zero());
        assert_eq!(quot, Poly::from_roots(&[q(1, 2), q(2, 1)]));
        let (_, rem) = p.div_linear(&q(1, 1));
        assert!(!rem.is_zero());
    }

    #[test]
    fn euclidean_division_roundtrip() {
        let a = Poly::<Q>::from_i64(&[3, -1, 4, 1, -5, 9]);
        let b = Poly::<Q>::from_i64(&[2, 0, 7]);
        let (quot, rem) = a.div_rem(&b);
        assert!(rem.degree().unwrap_or(0) < 2);
        assert_eq!(quot * b + rem, a);
    }
}
