//! The three quasi-exactly-solvable families of the BC1 elliptic model.
//!
//! Each family pairs a gauge factor `Ψ₀(x)` with a coupling pair `(κ₂, κ₃)`
//! for which `h = −2Ψ₀⁻¹(H − E₀)Ψ₀`, written in `τ = ℘(x)`, is a
//! second-order operator with polynomial coefficients:
//!
//! | family | `Ψ₀` | `E₀` |
//! |--------|------|------|
//! | first  | `(℘′)^μ` | `0` |
//! | second | `(℘′)^μ (℘ − e_k)^{1/2−μ}` | `(4μ²−1)/2 · e_k` |
//! | third  | `(℘′)^ν [(℘ − e_i)(℘ − e_j)]^{1/2−ν}` | `(1−2ν)(3−2ν)/2 · e_k` |
//!
//! An eigenvalue `λ` of `h` corresponds to the energy `E = E₀ − λ/2`.
//!
//! The shipped coupling map is the one confirmed by the x-space oracle:
//!
//! ```text
//! first:  κ₂ = 2μ(μ−1),  κ₃ = 2μ(1+2μ) + n(2n+1+6μ)
//! second: κ₂ = 2μ(μ−1),  κ₃ = (1+2μ) + 2n² + n(3+2μ)
//! third:  κ₂ = 2ν(ν−1),  κ₃ = (3−2ν) + 2n² + n(5−2ν)
//! ```
//!
//! Other printed variants of these maps are available through
//! [`coupling_candidates`] so that they can be adjudicated.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::diffop::{DiffOp, Poly};
use crate::elliptic::LatticeInvariants;
use crate::error::{Error, Result};
use crate::scalar::{principal_pow, Scalar};
use crate::sl2::{Sl2Combination, Sl2Generator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    First,
    Second,
    Third,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::First => "first",
            FamilyKind::Second => "second",
            FamilyKind::Third => "third",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingFamily<S> {
    First { mu: S, n: S },
    Second { mu: S, n: S, k: usize },
    /// `k` is the root left out of the gauge factor's root product.
    Third { nu: S, n: S, k: usize },
}

impl<S: Scalar> CouplingFamily<S> {
    pub fn first(mu: S, n: S) -> Self {
        CouplingFamily::First { mu, n }
    }

    pub fn second(mu: S, n: S, k: usize) -> Result<Self> {
        check_root_index(k)?;
        Ok(CouplingFamily::Second { mu, n, k })
    }

    pub fn third(nu: S, n: S, k: usize) -> Result<Self> {
        check_root_index(k)?;
        Ok(CouplingFamily::Third { nu, n, k })
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            CouplingFamily::First { .. } => FamilyKind::First,
            CouplingFamily::Second { .. } => FamilyKind::Second,
            CouplingFamily::Third { .. } => FamilyKind::Third,
        }
    }

    /// `μ` for the first two families, `ν` for the third.
    pub fn param(&self) -> &S {
        match self {
            CouplingFamily::First { mu, .. } | CouplingFamily::Second { mu, .. } => mu,
            CouplingFamily::Third { nu, .. } => nu,
        }
    }

    pub fn n(&self) -> &S {
        match self {
            CouplingFamily::First { n, .. }
            | CouplingFamily::Second { n, .. }
            | CouplingFamily::Third { n, .. } => n,
        }
    }

    pub fn root_index(&self) -> Option<usize> {
        match self {
            CouplingFamily::First { .. } => None,
            CouplingFamily::Second { k, .. } | CouplingFamily::Third { k, .. } => Some(*k),
        }
    }

    /// `n` as a nonnegative integer, when it is one.
    pub fn integer_n(&self) -> Option<usize> {
        self.n().as_integer().and_then(|v| usize::try_from(v).ok())
    }

    /// Like [`integer_n`](Self::integer_n) but with the refusal message.
    pub fn require_integer_n(&self) -> Result<usize> {
        self.integer_n()
            .ok_or_else(|| {
                let n = self.n().to_complex();
                Error::NonIntegerN(if n.im == 0.0 { n.re.to_string() } else { n.to_string() })
            })
    }

    /// Same family and parameters with a different `n`.
    pub fn with_n(&self, n: S) -> Self {
        match self.clone() {
            CouplingFamily::First { mu, .. } => CouplingFamily::First { mu, n },
            CouplingFamily::Second { mu, k, .. } => CouplingFamily::Second { mu, n, k },
            CouplingFamily::Third { nu, k, .. } => CouplingFamily::Third { nu, n, k },
        }
    }

    pub fn to_complex(&self) -> CouplingFamily<Complex64> {
        match self {
            CouplingFamily::First { mu, n } => CouplingFamily::First {
                mu: mu.to_complex(),
                n: n.to_complex(),
            },
            CouplingFamily::Second { mu, n, k } => CouplingFamily::Second {
                mu: mu.to_complex(),
                n: n.to_complex(),
                k: *k,
            },
            CouplingFamily::Third { nu, n, k } => CouplingFamily::Third {
                nu: nu.to_complex(),
                n: n.to_complex(),
                k: *k,
            },
        }
    }
}

fn check_root_index(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidRootIndex(k))
    }
}

/// Parses `first:mu=0.25,n=3`, `second:mu=1/4,n=2,k=1`, `third:nu=0.5,n=1,k=3`.
impl<S: Scalar> FromStr for CouplingFamily<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "`<family>:<key>=<value>,...`"))?;
        let mut mu = None;
        let mut nu = None;
        let mut n = None;
        let mut k = None;
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(item, "`key=value`"))?;
            match key.trim() {
                "mu" => mu = Some(S::parse_real(value)?),
                "nu" => nu = Some(S::parse_real(value)?),
                "n" => n = Some(S::parse_real(value)?),
                "k" => {
                    k = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|_| Error::parse(value, "root index 1, 2 or 3"))?,
                    )
                }
                other => return Err(Error::parse(other, "one of mu, nu, n, k")),
            }
        }
        let n = n.ok_or_else(|| Error::parse(s, "an `n=` entry"))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(CouplingFamily::first(
                mu.ok_or_else(|| Error::parse(s, "a `mu=` entry"))?,
                n,
            )),
            "second" => CouplingFamily::second(
                mu.ok_or_else(|| Error::parse(s, "a `mu=` entry"))?,
                n,
                k.ok_or_else(|| Error::parse(s, "a `k=` entry"))?,
            ),
            "third" => CouplingFamily::third(
                nu.ok_or_else(|| Error::parse(s, "a `nu=` entry"))?,
                n,
                k.ok_or_else(|| Error::parse(s, "a `k=` entry"))?,
            ),
            _ => Err(Error::parse(kind, "first, second or third")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingConstants<S> {
    /// Coefficient of `℘(2x)`.
    pub kappa2: S,
    /// Coefficient of `℘(x)`.
    pub kappa3: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingConvention {
    /// The oracle-confirmed map.
    Validated,
    /// The general-`n` formulas as printed in the source derivation.
    AsPrinted,
}

/// `(κ₂, κ₃)` for which the family's algebraic operator is the gauge rotation
/// of the Hamiltonian.
pub fn coupling_map<S: Scalar>(fam: &CouplingFamily<S>) -> CouplingConstants<S> {
    coupling_map_with(fam, CouplingConvention::Validated)
}

pub fn coupling_map_with<S: Scalar>(
    fam: &CouplingFamily<S>,
    convention: CouplingConvention,
) -> CouplingConstants<S> {
    let candidates = coupling_candidates(fam);
    let wanted = match convention {
        CouplingConvention::Validated => CandidateOrigin::Validated,
        CouplingConvention::AsPrinted => CandidateOrigin::PrintedGeneral,
    };
    candidates
        .into_iter()
        .find(|c| c.origin == wanted)
        .map(|c| c.couplings)
        .expect("every family has a validated and a printed general map")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateOrigin {
    /// Confirmed by the x-space oracle; what [`coupling_map`] returns.
    Validated,
    /// Printed map for general `n`.
    PrintedGeneral,
    /// Printed map for the `n = 0` ground state.
    PrintedGround,
    /// Printed explicit `n = 1` example.
    PrintedExample,
    /// Obtained by inverting the printed `κ̃₃` relation.
    PrintedTildeRelation,
}

/// One candidate `(κ₂, κ₃)` formula, labelled by its printed form.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingCandidate<S> {
    pub origin: CandidateOrigin,
    pub formula: &'static str,
    pub couplings: CouplingConstants<S>,
}

/// All candidate coupling formulas applicable to `fam`, validated one first.
pub fn coupling_candidates<S: Scalar>(fam: &CouplingFamily<S>) -> Vec<CouplingCandidate<S>> {
    let i = S::from_i64;
    let p = fam.param().clone();
    let n = fam.n().clone();
    let two_pp = i(2) * p.clone() * (p.clone() - i(1));
    let pp = p.clone() * (p.clone() - i(1));
    let cand = |origin, formula, kappa2: S, kappa3: S| CouplingCandidate {
        origin,
        formula,
        couplings: CouplingConstants { kappa2, kappa3 },
    };
    let is_zero = n.is_zero();
    let is_one = n == i(1);
    let mut out = Vec::new();
    match fam.kind() {
        FamilyKind::First => {
            let mu = p;
            out.push(cand(
                CandidateOrigin::Validated,
                "κ₂ = 2μ(μ−1), κ₃ = 2μ(1+2μ) + n(2n+1+6μ)",
                two_pp.clone(),
                i(2) * mu.clone() * (i(1) + i(2) * mu.clone())
                    + n.clone() * (i(2) * n.clone() + i(1) + i(6) * mu.clone()),
            ));
            out.push(cand(
                CandidateOrigin::PrintedGeneral,
                "κ₂ = 2μ(μ−1), κ₃ = (n+2μ)(n+2μ+1)",
                two_pp.clone(),
                (n.clone() + i(2) * mu.clone()) * (n.clone() + i(2) * mu.clone() + i(1)),
            ));
            out.push(cand(
                CandidateOrigin::PrintedTildeRelation,
                "2κ₃ − 4μ(1+2μ) = 2n(2n+1+6μ)",
                two_pp.clone(),
                i(2) * mu.clone() * (i(1) + i(2) * mu.clone())
                    + n.clone() * (i(2) * n.clone() + i(1) + i(6) * mu.clone()),
            ));
            if is_zero {
                out.push(cand(
                    CandidateOrigin::PrintedGround,
                    "κ₂ = 2μ(μ−1), κ₃ = 2μ(1+2μ)",
                    two_pp,
                    i(2) * mu.clone() * (i(1) + i(2) * mu),
                ));
            } else if is_one {
                out.push(cand(
                    CandidateOrigin::PrintedExample,
                    "κ₂ = 2μ(μ−1), κ₃ = 2(1+2μ)(1+μ)",
                    two_pp,
                    i(2) * (i(1) + i(2) * mu.clone()) * (i(1) + mu),
                ));
            }
        }
        FamilyKind::Second => {
            let mu = p;
            let n_part = i(2) * n.clone() * n.clone() + n.clone() * (i(3) + i(2) * mu.clone());
            let printed_offset = (i(1) + i(2) * mu.clone()) * (i(1) - mu.clone());
            out.push(cand(
                CandidateOrigin::Validated,
                "κ₂ = 2μ(μ−1), κ₃ = (1+2μ) + 2n² + n(3+2μ)",
                two_pp.clone(),
                i(1) + i(2) * mu.clone() + n_part.clone(),
            ));
            out.push(cand(
                CandidateOrigin::PrintedGeneral,
                "κ₂ = μ(μ−1), κ₃ = 2n² + n(3+2μ) + (1+2μ)(1−μ)",
                pp,
                n_part.clone() + printed_offset.clone(),
            ));
            out.push(cand(
                CandidateOrigin::PrintedTildeRelation,
                "κ₃ − (1−μ)(1+2μ) = 2n(n−1) + n(2μ+5)",
                two_pp.clone(),
                n_part + printed_offset.clone(),
            ));
            if is_zero {
                out.push(cand(
                    CandidateOrigin::PrintedGround,
                    "κ₂ = 2μ(μ−1), κ₃ = (1+2μ)(1−μ)",
                    two_pp,
                    printed_offset,
                ));
            }
        }
        FamilyKind::Third => {
            let nu = p;
            let n_part = i(2) * n.clone() * n.clone() + n.clone() * (i(5) - i(2) * nu.clone());
            out.push(cand(
                CandidateOrigin::Validated,
                "κ₂ = 2ν(ν−1), κ₃ = (3−2ν) + 2n² + n(5−2ν)",
                two_pp.clone(),
                i(3) - i(2) * nu.clone() + n_part.clone(),
            ));
            out.push(cand(
                CandidateOrigin::PrintedGeneral,
                "κ₂ = ν(ν−1), κ₃ = 2n² + n(5−2ν) + ν(1−2ν)",
                pp,
                n_part.clone() + nu.clone() * (i(1) - i(2) * nu.clone()),
            ));
            out.push(cand(
                CandidateOrigin::PrintedTildeRelation,
                "κ₃ − ν(3−2ν) = 2n(n−1) + n(7−2ν)",
                two_pp.clone(),
                n_part + nu.clone() * (i(3) - i(2) * nu.clone()),
            ));
            if is_zero {
                out.push(cand(
                    CandidateOrigin::PrintedGround,
                    "κ₂ = 2ν(ν−1), κ₃ = ν(1−ν)",
                    two_pp,
                    nu.clone() * (i(1) - nu),
                ));
            }
        }
    }
    out
}

/// `Ψ₀ = (℘′)^a · ∏ (℘ − e_i)^{b_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFactor<S> {
    pub prime_exponent: S,
    pub root_exponents: [S; 3],
}

impl<S: Scalar> GaugeFactor<S> {
    /// Exponents of `(τ − e_i)` once `(℘′)² = 4∏(τ − e_i)` is substituted;
    /// two gauge factors with equal exponents differ by a constant only.
    pub fn tau_exponents(&self) -> [S; 3] {
        let half = self.prime_exponent.clone() * S::half();
        self.root_exponents.clone().map(|b| b + half.clone())
    }
}

pub fn gauge_factor<S: Scalar>(fam: &CouplingFamily<S>) -> GaugeFactor<S> {
    let z = S::zero;
    match fam {
        CouplingFamily::First { mu, .. } => GaugeFactor {
            prime_exponent: mu.clone(),
            root_exponents: [z(), z(), z()],
        },
        CouplingFamily::Second { mu, k, .. } => {
            let mut b = [z(), z(), z()];
            b[k - 1] = S::half() - mu.clone();
            GaugeFactor {
                prime_exponent: mu.clone(),
                root_exponents: b,
            }
        }
        CouplingFamily::Third { nu, k, .. } => {
            let s = S::half() - nu.clone();
            let mut b = [s.clone(), s.clone(), s];
            b[k - 1] = z();
            GaugeFactor {
                prime_exponent: nu.clone(),
                root_exponents: b,
            }
        }
    }
}

/// The subtracted ground energy `E₀` of the family.
pub fn energy_offset<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<S> {
    let i = S::from_i64;
    match fam {
        CouplingFamily::First { .. } => Ok(S::zero()),
        CouplingFamily::Second { mu, k, .. } => {
            let e = inv.root(*k)?.clone();
            Ok((i(4) * mu.clone() * mu.clone() - i(1)) * S::half() * e)
        }
        CouplingFamily::Third { nu, k, .. } => {
            let e = inv.root(*k)?.clone();
            Ok((i(1) - i(2) * nu.clone()) * (i(3) - i(2) * nu.clone()) * S::half() * e)
        }
    }
}

/// Ground-state factor written in τ:
/// `Ψ₀(τ) = (4τ³ − g2τ − g3)^{a/2} · ∏ (τ − e_i)^{b_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauGroundState<S> {
    pub cubic: Poly<S>,
    pub cubic_exponent: S,
    pub roots: [S; 3],
    pub root_exponents: [S; 3],
}

impl<S: Scalar> TauGroundState<S> {
    /// Principal-branch value at `τ`.
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let mut v = principal_pow(self.cubic.eval_complex(tau), self.cubic_exponent.to_complex());
        for (e, b) in self.roots.iter().zip(&self.root_exponents) {
            v *= principal_pow(tau - e.to_complex(), b.to_complex());
        }
        v
    }

    /// The factor as a polynomial, when every exponent is a nonnegative integer.
    pub fn as_polynomial(&self) -> Option<Poly<S>> {
        let nonneg = |s: &S| s.as_integer().and_then(|v| usize::try_from(v).ok());
        let mut p = (0..nonneg(&self.cubic_exponent)?).fold(Poly::one(), |acc, _| acc * self.cubic.clone());
        for (e, b) in self.roots.iter().zip(&self.root_exponents) {
            let lin = Poly::from_coeffs(vec![-e.clone(), S::one()]);
            for _ in 0..nonneg(b)? {
                p = p * lin.clone();
            }
        }
        Some(p)
    }
}

pub fn tau_ground_state<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> TauGroundState<S> {
    let g = gauge_factor(fam);
    TauGroundState {
        cubic: inv.cubic(),
        cubic_exponent: g.prime_exponent * S::half(),
        roots: inv.roots.clone(),
        root_exponents: g.root_exponents,
    }
}

/// The explicit algebraic operator of the family.
///
/// ```text
/// first:  R∂² + (1+2μ)(6τ² − g2/2)∂ − 2n(2n+1+6μ)τ
/// second: R∂² + 2((5+2μ)τ² + 2(1−2μ)e_k(τ+e_k) − (3−2μ)g2/4)∂ − 2κ̃τ,  κ̃ = 2n(n−1) + n(5+2μ)
/// third:  R∂² + 2((7−2ν)τ² + 2(2ν−1)e_k(τ+e_k) − (1+2ν)g2/4)∂ − 2κ̃τ,  κ̃ = 2n(n−1) + n(7−2ν)
/// ```
///
/// with `R = 4τ³ − g2τ − g3`.
pub fn build_operator<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<DiffOp<S>> {
    explicit_operator(fam, inv, ThirdG2Term::Consistent)
}

/// The third-family operator with the `g2` term printed as `(5+2ν)g2/4`;
/// kept only so the discrepancy report can show it fails both checks.
pub fn printed_third_operator<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<DiffOp<S>> {
    explicit_operator(fam, inv, ThirdG2Term::AsPrinted)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ThirdG2Term {
    Consistent,
    AsPrinted,
}

fn explicit_operator<S: Scalar>(
    fam: &CouplingFamily<S>,
    inv: &LatticeInvariants<S>,
    third: ThirdG2Term,
) -> Result<DiffOp<S>> {
    let i = S::from_i64;
    let quarter = S::from_ratio(1, 4);
    let g2 = inv.g2.clone();
    let c2 = inv.cubic();
    let (c1, tilde) = match fam {
        CouplingFamily::First { mu, n } => {
            let a = i(1) + i(2) * mu.clone();
            let c1 = Poly::from_coeffs(vec![-(g2 * S::half()), S::zero(), i(6)]).scale(&a);
            let tilde = n.clone() * (i(2) * n.clone() + i(1) + i(6) * mu.clone());
            (c1, tilde)
        }
        CouplingFamily::Second { mu, n, k } => {
            let e = inv.root(*k)?.clone();
            let b = i(2) * (i(1) - i(2) * mu.clone()) * e.clone();
            let c1 = Poly::from_coeffs(vec![
                b.clone() * e - (i(3) - i(2) * mu.clone()) * g2 * quarter,
                b,
                i(5) + i(2) * mu.clone(),
            ])
            .scale(&i(2));
            let tilde = i(2) * n.clone() * (n.clone() - i(1)) + n.clone() * (i(5) + i(2) * mu.clone());
            (c1, tilde)
        }
        CouplingFamily::Third { nu, n, k } => {
            let e = inv.root(*k)?.clone();
            let b = i(2) * (i(2) * nu.clone() - i(1)) * e.clone();
            let g2_coeff = match third {
                ThirdG2Term::Consistent => i(1) + i(2) * nu.clone(),
                ThirdG2Term::AsPrinted => i(5) + i(2) * nu.clone(),
            };
            let c1 = Poly::from_coeffs(vec![
                b.clone() * e - g2_coeff * g2 * quarter,
                b,
                i(7) - i(2) * nu.clone(),
            ])
            .scale(&i(2));
            let tilde = i(2) * n.clone() * (n.clone() - i(1)) + n.clone() * (i(7) - i(2) * nu.clone());
            (c1, tilde)
        }
    };
    let c0 = Poly::monomial(-(i(2) * tilde), 1);
    Ok(DiffOp::second_order(c2, c1, c0))
}

/// The family operator as a bilinear combination of sl(2) generators with
/// spin `n`; every family shares the head `4J+J0 − g2 J0J− − g3 J−J−`.
pub fn build_sl2_form<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<Sl2Combination<S>> {
    let i = S::from_i64;
    let n = fam.n().clone();
    let jp = || Sl2Generator::raise(n.clone());
    let j0 = || Sl2Generator::cartan(n.clone());
    let jm = || Sl2Generator::lower(n.clone());
    let g2 = inv.g2.clone();
    let quarter = S::from_ratio(1, 4);
    let head = Sl2Combination::new()
        .quad(i(4), jp(), j0())
        .quad(-g2.clone(), j0(), jm())
        .quad(-inv.g3.clone(), jm(), jm());
    let c = match fam {
        CouplingFamily::First { mu, .. } => head
            .lin(i(2) * (i(4) * n.clone() + i(1) + i(6) * mu.clone()), jp())
            .lin(-(g2 * (n.clone() + S::half() + mu.clone())), jm()),
        CouplingFamily::Second { mu, k, .. } => {
            let e = inv.root(*k)?.clone();
            let b = i(4) * (i(1) - i(2) * mu.clone()) * e.clone();
            head.lin(i(2) * (i(4) * n.clone() + i(3) + i(2) * mu.clone()), jp())
                .lin(b.clone(), j0())
                .constant(b * n.clone())
                .lin(
                    i(2) * (i(2) * (i(1) - i(2) * mu.clone()) * e.clone() * e
                        - (i(2) * n.clone() + i(3) - i(2) * mu.clone()) * g2 * quarter),
                    jm(),
                )
        }
        CouplingFamily::Third { nu, k, .. } => {
            let e = inv.root(*k)?.clone();
            let b = i(4) * (i(2) * nu.clone() - i(1)) * e.clone();
            head.lin(i(2) * (i(4) * n.clone() + i(5) - i(2) * nu.clone()), jp())
                .lin(b.clone(), j0())
                .constant(b * n.clone())
                .lin(
                    i(2) * (i(2) * (i(2) * nu.clone() - i(1)) * e.clone() * e
                        - (i(2) * n.clone() + i(1) + i(2) * nu.clone()) * g2 * quarter),
                    jm(),
                )
        }
    };
    Ok(c)
}

/// The first-family operator `−2Ψ₀⁻¹HΨ₀` with `Ψ₀ = (℘′)^μ`,
/// `κ₂ = 2μ(μ−1)` and an arbitrary `κ₃`:
/// `R∂² + (1+2μ)(R′/2)∂ − (2κ₃ − 4μ(1+2μ))τ`.
pub fn prime_gauge_operator<S: Scalar>(mu: &S, kappa3: &S, inv: &LatticeInvariants<S>) -> DiffOp<S> {
    let i = S::from_i64;
    let r = inv.cubic();
    let c1 = r.derivative().scale(&(S::half() * (i(1) + i(2) * mu.clone())));
    let tilde = i(2) * kappa3.clone() - i(4) * mu.clone() * (i(1) + i(2) * mu.clone());
    DiffOp::second_order(r, c1, Poly::monomial(-tilde, 1))
}

/// `f⁻¹ ∘ op ∘ f` for `f = (τ − root)^s` and a second-order `op`:
///
/// ```text
/// c2∂² + (c1 + 2s c2/(τ−e))∂ + (c0 + s c1/(τ−e) + s(s−1) c2/(τ−e)²)
/// ```
///
/// Fails when the result is not polynomial.
pub fn conjugate_by_root_power<S: Scalar>(op: &DiffOp<S>, root: &S, s: &S) -> Result<DiffOp<S>> {
    if op.order() > 2 {
        return Err(Error::OrderOverflow { order: op.order(), max: 2 });
    }
    let (c2, c1, c0) = (op.c2(), op.c1(), op.c0());
    let lin = Poly::from_coeffs(vec![-root.clone(), S::one()]);
    let scale = op.max_abs().max(1.0);
    let not_poly = || Error::NotPolynomial(format!("{root:?}"));
    let (c2_over, rem) = c2.div_linear(root);
    if !rem.is_negligible(scale) {
        return Err(not_poly());
    }
    // s·c1·(τ−e) + s(s−1)·c2 must vanish to second order at τ = e
    let numer = (&c1 * &lin).scale(s) + c2.scale(&(s.clone() * (s.clone() - S::one())));
    let (q1, r1) = numer.div_linear(root);
    let (q2, r2) = q1.div_linear(root);
    if !r1.is_negligible(scale) || !r2.is_negligible(scale) {
        return Err(not_poly());
    }
    let new_c1 = c1 + c2_over.scale(&(S::from_i64(2) * s.clone()));
    Ok(DiffOp::second_order(c2, new_c1, c0 + q2))
}

/// The family operator obtained by conjugating the first-family operator,
/// `Φ⁻¹(h + 2E₀)Φ` with `Φ` the extra root factor of the gauge; an
/// independent route to [`build_operator`] for the second and third families.
pub fn conjugated_operator<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<DiffOp<S>> {
    let kappa3 = coupling_map(fam).kappa3;
    let h = prime_gauge_operator(fam.param(), &kappa3, inv);
    let shifted = h + DiffOp::scalar(S::from_i64(2) * energy_offset(fam, inv)?);
    let g = gauge_factor(fam);
    let mut op = shifted;
    for (root, b) in inv.roots.iter().zip(&g.root_exponents) {
        if !b.is_zero() {
            op = conjugate_by_root_power(&op, root, b)?;
        }
    }
    Ok(op)
}
