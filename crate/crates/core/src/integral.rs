//! The particular integral `i_par(n) = ∏_{j=0}^{n} (J0(n) + j)`.
//!
//! On `τ^p` the factor `J0(n) + j` acts as multiplication by `p − n + j`, so
//! `i_par` kills exactly `P_n` among monomials. Its commutator with a family
//! operator vanishes on `P_n` but not as an operator, and is checked only
//! by application to basis vectors.

use crate::diffop::{DiffOp, Poly};
use crate::elliptic::LatticeInvariants;
use crate::error::Result;
use crate::model::{build_operator, CouplingFamily};
use crate::scalar::Scalar;
use crate::sl2::Sl2Generator;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticularIntegral<S> {
    pub n: usize,
    /// `J0(n) + j` for `j = 0..=n`, in application order.
    pub factors: Vec<DiffOp<S>>,
    /// The composed operator of order `n + 1`.
    pub operator: DiffOp<S>,
}

impl<S: Scalar> ParticularIntegral<S> {
    /// Applies the factors one after another (cheaper than the composed form).
    pub fn apply(&self, p: &Poly<S>) -> Poly<S> {
        self.factors.iter().fold(p.clone(), |acc, f| f.apply(&acc))
    }
}

pub fn build_ipar<S: Scalar>(n: usize) -> ParticularIntegral<S> {
    let j0 = Sl2Generator::cartan(S::from_i64(n as i64)).as_diffop();
    let factors: Vec<DiffOp<S>> = (0..=n)
        .map(|j| j0.clone() + DiffOp::scalar(S::from_i64(j as i64)))
        .collect();
    let operator = factors
        .iter()
        .try_fold(DiffOp::identity(), |acc, f| acc.compose(f, n + 1))
        .expect("the product has order n + 1");
    ParticularIntegral { n, factors, operator }
}

/// `[h, i_par] τ^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorImage<S> {
    pub degree: usize,
    pub image: Poly<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorCheck<S> {
    pub n: usize,
    /// Every `τ^p`, `p ≤ n`, is mapped to zero.
    pub holds: bool,
    /// First monomial of `P_n` with a nonzero image.
    pub witness: Option<CommutatorImage<S>>,
    /// Images of `τ^0, …, τ^n`.
    pub images: Vec<CommutatorImage<S>>,
    /// The image of `τ^{n+1}`, outside the claim.
    pub beyond: CommutatorImage<S>,
}

impl<S: Scalar> CommutatorCheck<S> {
    /// Largest coefficient over the images of `P_n` (for floating-point runs).
    pub fn max_image(&self) -> f64 {
        self.images.iter().map(|c| c.image.max_abs()).fold(0.0, f64::max)
    }
}

pub fn commutator_on<S: Scalar>(h: &DiffOp<S>, ipar: &ParticularIntegral<S>, p: &Poly<S>) -> Poly<S> {
    h.apply(&ipar.apply(p)) - ipar.apply(&h.apply(p))
}

/// Applies `[h^(e), i_par(n)]` to the monomial basis of `P_n` (and to
/// `τ^{n+1}` as a control) for the family's own operator. `n` must be an
/// integer.
pub fn check_commutator<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<CommutatorCheck<S>> {
    let n = fam.require_integer_n()?;
    let h = build_operator(fam, inv)?;
    let ipar = build_ipar::<S>(n);
    let image = |degree: usize| CommutatorImage {
        degree,
        image: commutator_on(&h, &ipar, &Poly::monomial(S::one(), degree)),
    };
    let images: Vec<_> = (0..=n).map(image).collect();
    let witness = images.iter().find(|c| !c.image.is_zero()).cloned();
    Ok(CommutatorCheck {
        n,
        holds: witness.is_none(),
        witness,
        images,
        beyond: image(n + 1),
    })
}
