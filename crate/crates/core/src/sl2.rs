//! The sl(2) generators as first-order operators in τ and bilinear
//! combinations of them.
//!
//! Normalization (kept as given, not the textbook `τ∂ − n/2`):
//!
//! ```text
//! J+(n) = τ²∂ − nτ,   J0(n) = τ∂ − n,   J− = ∂
//! ```
//!
//! With this normalization `[J0, J±] = ±J±` and `[J+, J−] = −2J0 − n`.
//! A product written `A·B` means `A ∘ B`: `B` acts first. The reversed
//! ordering does not reproduce the explicit Hamiltonians (see the tests).

use crate::diffop::{DiffOp, Leakage, Poly, PolySpace, DEFAULT_MAX_ORDER};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    Raise,
    Cartan,
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Generator<S> {
    pub kind: GeneratorKind,
    /// Representation parameter `n`; any scalar, integer or not.
    pub spin: S,
}

impl<S: Scalar> Sl2Generator<S> {
    pub fn raise(spin: S) -> Self {
        Sl2Generator { kind: GeneratorKind::Raise, spin }
    }

    pub fn cartan(spin: S) -> Self {
        Sl2Generator { kind: GeneratorKind::Cartan, spin }
    }

    /// `J−` does not depend on `n`; the spin is carried for uniformity.
    pub fn lower(spin: S) -> Self {
        Sl2Generator { kind: GeneratorKind::Lower, spin }
    }

    pub fn as_diffop(&self) -> DiffOp<S> {
        let n = self.spin.clone();
        match self.kind {
            GeneratorKind::Raise => DiffOp::new(vec![
                Poly::monomial(-n, 1),
                Poly::monomial(S::one(), 2),
            ]),
            GeneratorKind::Cartan => DiffOp::new(vec![Poly::constant(-n), Poly::tau()]),
            GeneratorKind::Lower => DiffOp::d(),
        }
    }
}

/// Which factor of a bilinear term acts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    /// `A·B = A ∘ B`, the right factor acts first.
    RightFirst,
    /// `A·B = B ∘ A`.
    LeftFirst,
}

/// `Σ c·A·B + Σ c·G + c0` over sl(2) generators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sl2Combination<S> {
    pub quadratic: Vec<(S, Sl2Generator<S>, Sl2Generator<S>)>,
    pub linear: Vec<(S, Sl2Generator<S>)>,
    pub constant: Option<S>,
}

impl<S: Scalar> Sl2Combination<S> {
    pub fn new() -> Self {
        Sl2Combination {
            quadratic: Vec::new(),
            linear: Vec::new(),
            constant: None,
        }
    }

    pub fn quad(mut self, c: S, a: Sl2Generator<S>, b: Sl2Generator<S>) -> Self {
        self.quadratic.push((c, a, b));
        self
    }

    pub fn lin(mut self, c: S, g: Sl2Generator<S>) -> Self {
        self.linear.push((c, g));
        self
    }

    pub fn constant(mut self, c: S) -> Self {
        let prev = self.constant.take().unwrap_or_else(S::zero);
        self.constant = Some(prev + c);
        self
    }

    /// Expands into a differential operator of order at most two.
    pub fn lower(&self) -> DiffOp<S> {
        self.lower_with(ProductOrder::RightFirst)
    }

    pub fn lower_with(&self, order: ProductOrder) -> DiffOp<S> {
        let mut op = DiffOp::zero();
        for (c, a, b) in &self.quadratic {
            let (a, b) = (a.as_diffop(), b.as_diffop());
            let prod = match order {
                ProductOrder::RightFirst => a.compose(&b, DEFAULT_MAX_ORDER),
                ProductOrder::LeftFirst => b.compose(&a, DEFAULT_MAX_ORDER),
            }
            .expect("products of two first-order operators have order 2");
            op = op + prod.scale(c);
        }
        for (c, g) in &self.linear {
            op = op + g.as_diffop().scale(c);
        }
        if let Some(c) = &self.constant {
            op = op + DiffOp::scalar(c.clone());
        }
        op
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preservation<S> {
    pub preserves: bool,
    pub leakage: Leakage<S>,
}

/// Whether `op` maps `P_n` into itself, with the leaking components.
pub fn check_preserves<S: Scalar>(op: &DiffOp<S>, space: PolySpace) -> Preservation<S> {
    let sm = op.matrix_on(space);
    Preservation {
        preserves: sm.preserves(),
        leakage: sm.leakage,
    }
}

/// The sl(2) relations in this normalization, checked by application to
/// `τ^m` for `m ≤ max_degree`. Returns the first failing relation and degree.
pub fn commutation_defect<S: Scalar>(n: &S, max_degree: usize) -> Option<(&'static str, usize)> {
    let jp = Sl2Generator::raise(n.clone()).as_diffop();
    let j0 = Sl2Generator::cartan(n.clone()).as_diffop();
    let jm = Sl2Generator::lower(n.clone()).as_diffop();
    let bracket = |a: &DiffOp<S>, b: &DiffOp<S>, p: &Poly<S>| a.apply(&b.apply(p)) - b.apply(&a.apply(p));
    for m in 0..=max_degree {
        let p = Poly::monomial(S::one(), m);
        if bracket(&j0, &jp, &p) != jp.apply(&p) {
            return Some(("[J0, J+] = J+", m));
        }
        if bracket(&j0, &jm, &p) != -jm.apply(&p) {
            return Some(("[J0, J-] = -J-", m));
        }
        let rhs = (j0.scale(&S::from_i64(-2)) - DiffOp::scalar(n.clone())).apply(&p);
        if bracket(&jp, &jm, &p) != rhs {
            return Some(("[J+, J-] = -2J0 - n", m));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn mono(d: usize) -> Poly<Q> {
        Poly::monomial(q(1, 1), d)
    }

    #[test]
    fn lower_generator_is_derivative() {
        assert_eq!(Sl2Generator::lower(q(3, 1)).as_diffop(), DiffOp::d());
    }

    #[test]
    fn cartan_at_zero_is_euler_operator() {
        let j0 = Sl2Generator::cartan(q(0, 1)).as_diffop();
        assert_eq!(j0, DiffOp::new(vec![Poly::zero(), Poly::tau()]));
    }

    #[test]
    fn raise_annihilates_highest_weight() {
        let jp = Sl2Generator::raise(q(2, 1)).as_diffop();
        assert!(jp.apply(&mono(2)).is_zero());
    }

    #[test]
    fn preservation_of_generators() {
        let p3 = PolySpace::new(3);
        for g in [
            Sl2Generator::raise(q(3, 1)),
            Sl2Generator::cartan(q(3, 1)),
            Sl2Generator::lower(q(3, 1)),
        ] {
            let r = check_preserves(&g.as_diffop(), p3);
            assert!(r.preserves && r.leakage.is_zero(), "{:?}", g.kind);
        }
        let r = check_preserves(&Sl2Generator::raise(q(5, 2)).as_diffop(), PolySpace::new(2));
        assert!(!r.preserves);
        // top monomial: (2 - 5/2) τ³
        assert_eq!(r.leakage.columns[2], Poly::monomial(q(-1, 2), 3));
    }

    #[test]
    fn commutation_relations() {
        for n in [q(0, 1), q(3, 1), q(5, 2), q(-7, 3)] {
            assert_eq!(commutation_defect(&n, 6), None);
        }
    }

    #[test]
    fn empty_combination_is_zero() {
        assert!(Sl2Combination::<Q>::new().lower().is_zero());
    }

    #[test]
    fn product_ordering_matters() {
        let n = q(2, 1);
        let c = Sl2Combination::new().quad(q(1, 1), Sl2Generator::raise(n.clone()), Sl2Generator::cartan(n));
        let a = c.lower_with(ProductOrder::RightFirst);
        let b = c.lower_with(ProductOrder::LeftFirst);
        assert_ne!(a, b);
    }
}
