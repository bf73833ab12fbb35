//! Differential operators in τ with polynomial coefficients.
//!
//! An operator is stored as the list of coefficient polynomials of
//! `∂^0, ∂^1, …`. The algebraic Hamiltonians are second order; composition
//! and commutators go to higher order, bounded by a configurable maximum.
//! Equality is always decided on coefficients, never by sampling.

mod matrix;
mod poly;

use std::ops::{Add, Neg, Sub};

pub use matrix::Matrix;
pub use poly::Poly;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default bound on the order of composed operators.
pub const DEFAULT_MAX_ORDER: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<S> {
    /// `coeffs[j]` multiplies `∂^j`; trailing zero coefficients are trimmed.
    coeffs: Vec<Poly<S>>,
}

impl<S: Scalar> DiffOp<S> {
    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn new(coeffs: Vec<Poly<S>>) -> Self {
        let mut op = DiffOp { coeffs };
        op.normalize();
        op
    }

    /// `c2(τ)∂² + c1(τ)∂ + c0(τ)`.
    pub fn second_order(c2: Poly<S>, c1: Poly<S>, c0: Poly<S>) -> Self {
        Self::new(vec![c0, c1, c2])
    }

    pub fn zero() -> Self {
        DiffOp { coeffs: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(Poly::one())
    }

    pub fn scalar(c: S) -> Self {
        Self::multiplication(Poly::constant(c))
    }

    /// Multiplication by `p(τ)`.
    pub fn multiplication(p: Poly<S>) -> Self {
        Self::new(vec![p])
    }

    /// The derivative `∂_τ`.
    pub fn d() -> Self {
        Self::new(vec![Poly::zero(), Poly::one()])
    }

    /// Order of the operator; the zero operator has order 0.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `∂^j`.
    pub fn coeff(&self, j: usize) -> Poly<S> {
        self.coeffs.get(j).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn c0(&self) -> Poly<S> {
        self.coeff(0)
    }

    pub fn c1(&self) -> Poly<S> {
        self.coeff(1)
    }

    pub fn c2(&self) -> Poly<S> {
        self.coeff(2)
    }

    pub fn coeffs(&self) -> &[Poly<S>] {
        &self.coeffs
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.coeffs.iter().map(|p| p.scale(c)).collect())
    }

    /// Applies the operator to a polynomial, exactly in coefficient arithmetic.
    pub fn apply(&self, p: &Poly<S>) -> Poly<S> {
        let mut out = Poly::zero();
        let mut deriv = p.clone();
        for c in &self.coeffs {
            if deriv.is_zero() {
                break;
            }
            out = out + c * &deriv;
            deriv = deriv.derivative();
        }
        out
    }

    /// Composition `self ∘ other` (apply `other` first).
    ///
    /// Uses `∂^i (b f^{(j)}) = Σ_k C(i,k) b^{(k)} f^{(i-k+j)}`.
    pub fn compose(&self, other: &Self, max_order: usize) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let order = self.order() + other.order();
        if order > max_order {
            return Err(Error::OrderOverflow { order, max: max_order });
        }
        let mut out = vec![Poly::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let mut b_k = b.clone();
                for k in 0..=i {
                    if b_k.is_zero() {
                        break;
                    }
                    let term = (a * &b_k).scale(&S::from_i64(binomial(i, k)));
                    let slot = i - k + j;
                    out[slot] = out[slot].clone() + term;
                    b_k = b_k.derivative();
                }
            }
        }
        Ok(Self::new(out))
    }

    /// The commutator `self∘other − other∘self`.
    pub fn commutator(&self, other: &Self, max_order: usize) -> Result<Self> {
        Ok(self.compose(other, max_order)? - other.compose(self, max_order)?)
    }

    /// Matrix of the operator on `P_n` in the monomial basis, together with
    /// the part of each image that falls outside `P_n`.
    pub fn matrix_on(&self, space: PolySpace) -> SpaceMatrix<S> {
        let dim = space.dim();
        let mut matrix = Matrix::zeros(dim, dim);
        let mut leakage = Vec::with_capacity(dim);
        for p in 0..dim {
            let image = self.apply(&Poly::monomial(S::one(), p));
            for q in 0..dim {
                matrix.set(q, p, image.coeff(q));
            }
            leakage.push(image.above_degree(space.n));
        }
        SpaceMatrix {
            space,
            matrix,
            leakage: Leakage { columns: leakage },
        }
    }

    /// Coefficient-wise comparison; exact for rational scalars.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|j| self.coeff(j).approx_eq(&other.coeff(j), rel_tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Poly::max_abs).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> DiffOp<num_complex::Complex64> {
        DiffOp::new(self.coeffs.iter().map(Poly::to_complex).collect())
    }
}

impl<S: Scalar> Add for DiffOp<S> {
    type Output = DiffOp<S>;

    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl<S: Scalar> Sub for DiffOp<S> {
    type Output = DiffOp<S>;

    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::new((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl<S: Scalar> Neg for DiffOp<S> {
    type Output = DiffOp<S>;

    fn neg(self) -> Self {
        DiffOp::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

/// Binomial coefficient for the small orders used here.
fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// The space `P_n = span{τ^p : 0 ≤ p ≤ n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolySpace {
    pub n: usize,
}

impl PolySpace {
    pub fn new(n: usize) -> Self {
        PolySpace { n }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn contains<S: Scalar>(&self, p: &Poly<S>) -> bool {
        p.degree().is_none_or(|d| d <= self.n)
    }

    pub fn basis<S: Scalar>(&self) -> impl Iterator<Item = Poly<S>> {
        (0..=self.n).map(|p| Poly::monomial(S::one(), p))
    }
}

/// Components of the images of the basis monomials that have degree above `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Leakage<S> {
    pub columns: Vec<Poly<S>>,
}

impl<S: Scalar> Leakage<S> {
    /// Exactly zero for rationals; for floats, every coefficient is exactly 0.0.
    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Poly::is_zero)
    }

    pub fn is_negligible(&self, scale: f64) -> bool {
        self.columns
            .iter()
            .all(|p| p.coeffs().iter().all(|c| c.is_negligible(scale)))
    }

    pub fn norm(&self) -> f64 {
        self.columns.iter().map(Poly::max_abs).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceMatrix<S> {
    pub space: PolySpace,
    /// `matrix[q][p]` is the coefficient of `τ^q` in `op(τ^p)`.
    pub matrix: Matrix<S>,
    pub leakage: Leakage<S>,
}

impl<S: Scalar> SpaceMatrix<S> {
    /// Whether the operator maps `P_n` into itself, judged relative to the
    /// matrix scale (exact for rationals).
    pub fn preserves(&self) -> bool {
        self.leakage.is_negligible(self.matrix.max_abs())
    }
}
