//! Oracle adjudication of conflicting printed formulas.
//!
//! Every candidate `(κ₂, κ₃)` of a family is tried against the τ-space
//! eigenfunctions (which do not depend on the candidate) and kept if the
//! x-space residual stays below tolerance. The printed third-family operator
//! and the printed energy normalization at `n = 1` get the same treatment.
//! The output is deterministic for a fixed [`OracleConfig`] and lattice.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::diffop::{Poly, PolySpace};
use crate::elliptic::{LatticeInvariants, RectangularLattice, Weierstrass};
use crate::error::Result;
use crate::model::{
    build_operator, conjugated_operator, coupling_candidates, coupling_map, energy_offset, printed_third_operator,
    CandidateOrigin, CouplingFamily,
};
use crate::oracle::{residual, OracleConfig};
use crate::scalar::Scalar;
use crate::spectrum::{eigenpairs, family_eigenpairs, Eigenpair};

/// Lattice used by [`discrepancy_report`].
pub const REPORT_TAU_IM: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub tau_im: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub items: Vec<Discrepancy>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub id: &'static str,
    pub question: &'static str,
    pub cases: Vec<Case>,
    /// Variants that pass in every case.
    pub consistent: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub family: String,
    pub variants: Vec<Variant>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Variant {
    pub label: String,
    pub formula: String,
    /// `[κ₂, κ₃]` where the variant is a coupling formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<[String; 2]>,
    /// Exact agreement with the gauge-conjugated Hamiltonian, where the
    /// variant is an operator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_conjugation: Option<bool>,
    pub max_residual: String,
    pub pass: bool,
}

fn sci(x: f64) -> String {
    format!("{x:.1e}")
}

fn real(z: Complex64) -> String {
    format!("{:.6}", z.re)
}

/// `first:mu=0.3,n=1` style label.
pub fn label(fam: &CouplingFamily<Complex64>) -> String {
    let n = fam.n().re;
    match fam {
        CouplingFamily::First { mu, .. } => format!("first:mu={},n={n}", mu.re),
        CouplingFamily::Second { mu, k, .. } => format!("second:mu={},n={n},k={k}", mu.re),
        CouplingFamily::Third { nu, k, .. } => format!("third:nu={},n={n},k={k}", nu.re),
    }
}

fn origin_label(o: CandidateOrigin) -> String {
    serde_json::to_value(o)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

struct Setup {
    inv: LatticeInvariants<Complex64>,
    wp: Weierstrass,
    cfg: OracleConfig,
}

impl Setup {
    /// Worst residual over all eigenpairs with the given couplings.
    fn worst(
        &self,
        fam: &CouplingFamily<Complex64>,
        pairs: &[Eigenpair],
        couplings: &crate::model::CouplingConstants<Complex64>,
        energy: impl Fn(&Eigenpair) -> Complex64,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for e in pairs {
            let r = residual(fam, &self.inv, &self.wp, &e.poly, energy(e), couplings, &self.cfg)?;
            worst = worst.max(r.max);
        }
        Ok(worst)
    }
}

/// Every candidate coupling map of `fam` against its τ-space eigenfunctions.
pub fn family_case(
    fam: &CouplingFamily<Complex64>,
    inv: &LatticeInvariants<Complex64>,
    wp: &Weierstrass,
    cfg: &OracleConfig,
) -> Result<Case> {
    let s = Setup { inv: inv.clone(), wp: wp.clone(), cfg: *cfg };
    let pairs = family_eigenpairs(fam, inv)?;
    let mut variants = Vec::new();
    for c in coupling_candidates(fam) {
        let worst = s.worst(fam, &pairs, &c.couplings, |e| e.energy)?;
        variants.push(Variant {
            label: origin_label(c.origin),
            formula: c.formula.to_string(),
            couplings: Some([real(c.couplings.kappa2), real(c.couplings.kappa3)]),
            matches_conjugation: None,
            max_residual: sci(worst),
            pass: worst < cfg.tolerance,
        });
    }
    Ok(Case { family: label(fam), variants })
}

fn coupling_item(
    s: &Setup,
    id: &'static str,
    question: &'static str,
    fams: &[CouplingFamily<Complex64>],
) -> Result<Discrepancy> {
    let cases = fams
        .iter()
        .map(|fam| family_case(fam, &s.inv, &s.wp, &s.cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(id, question, cases))
}

fn finish(id: &'static str, question: &'static str, cases: Vec<Case>) -> Discrepancy {
    let mut consistent: Vec<String> = Vec::new();
    for v in cases.iter().flat_map(|c| &c.variants) {
        if !consistent.contains(&v.label) {
            consistent.push(v.label.clone());
        }
    }
    // a variant missing from some case (e.g. an n = 0 formula) is judged on
    // the cases where it applies
    consistent.retain(|l| {
        cases
            .iter()
            .flat_map(|c| &c.variants)
            .filter(|v| &v.label == l)
            .all(|v| v.pass)
    });
    Discrepancy { id, question, cases, consistent }
}

fn third_operator_item(s: &Setup) -> Result<Discrepancy> {
    let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let exact_inv = LatticeInvariants::from_roots(q(7, 5), q(-1, 3));
    let mut cases = Vec::new();
    for n in [1, 2] {
        let exact = CouplingFamily::third(q(7, 10), BigRational::from_i64(n), 1)?;
        let conj = conjugated_operator(&exact, &exact_inv)?;
        let fam = exact.to_complex();
        let offset = energy_offset(&fam, &s.inv)?;
        let mut variants = Vec::new();
        for (label, formula, printed) in [
            ("corrected", "first-order coefficient −(1+2ν)g₂/4 + …", false),
            ("printed", "first-order coefficient −(5+2ν)g₂/4 + …", true),
        ] {
            let (op, op_exact) = if printed {
                (printed_third_operator(&fam, &s.inv)?, printed_third_operator(&exact, &exact_inv)?)
            } else {
                (build_operator(&fam, &s.inv)?, build_operator(&exact, &exact_inv)?)
            };
            let pairs = eigenpairs(&op, PolySpace::new(n as usize), &offset)?;
            let worst = s.worst(&fam, &pairs, &coupling_map(&fam), |e| e.energy)?;
            variants.push(Variant {
                label: label.to_string(),
                formula: formula.to_string(),
                couplings: None,
                matches_conjugation: Some(op_exact == conj),
                max_residual: sci(worst),
                pass: worst < s.cfg.tolerance,
            });
        }
        cases.push(Case { family: label(&fam), variants });
    }
    Ok(finish(
        "third-operator-g2-term",
        "g₂ term of the third-family first-order coefficient: printed (5+2ν) vs gauge-derived (1+2ν)",
        cases,
    ))
}

fn energy_item(s: &Setup) -> Result<Discrepancy> {
    let mut cases = Vec::new();
    for mu in [0.3, -0.2] {
        let fam = CouplingFamily::first(Complex64::new(mu, 0.0), Complex64::new(1.0, 0.0));
        let g2 = s.inv.g2;
        let printed = (1.0 + 2.0 * mu) * (3.0 * g2).sqrt();
        let shift = 0.5 * (g2 / 3.0).sqrt();
        // P = τ − ½√(g₂/3) carries λ = +(1+2μ)√(3g₂), P = τ + ½√(g₂/3) the negative one
        let pairs: Vec<Eigenpair> = [(-shift, printed), (shift, -printed)]
            .into_iter()
            .map(|(c, lambda)| Eigenpair {
                h_eigenvalue: lambda,
                energy: Complex64::new(0.0, 0.0),
                poly: Poly::from_coeffs(vec![c, Complex64::new(1.0, 0.0)]),
                eigenspace: Vec::new(),
                algebraic_multiplicity: 1,
                geometric_multiplicity: 1,
            })
            .collect();
        let k = coupling_map(&fam);
        let mut variants = Vec::new();
        for (label, formula, factor) in [
            ("energy-minus-half", "E = −λ/2 with λ = ±(1+2μ)√(3g₂)", -0.5),
            ("printed-as-energy", "E = ±(1+2μ)√(3g₂)", 1.0),
        ] {
            let worst = s.worst(&fam, &pairs, &k, |e| e.h_eigenvalue * factor)?;
            variants.push(Variant {
                label: label.to_string(),
                formula: formula.to_string(),
                couplings: None,
                matches_conjugation: None,
                max_residual: sci(worst),
                pass: worst < s.cfg.tolerance,
            });
        }
        cases.push(Case { family: label(&fam), variants });
    }
    Ok(finish(
        "first-n1-energy-normalization",
        "relation between the printed n = 1 values ±(1+2μ)√(3g₂) and the energy of H",
        cases,
    ))
}

/// The full report on the fixed lattice [`REPORT_TAU_IM`].
pub fn discrepancy_report(cfg: &OracleConfig) -> Result<DiscrepancyReport> {
    let wp = Weierstrass::from_lattice(RectangularLattice::new(REPORT_TAU_IM)?)?;
    let inv = LatticeInvariants::from_invariants(wp.g2(), wp.g3());
    let s = Setup { inv, wp, cfg: *cfg };
    let c = |x: f64| Complex64::new(x, 0.0);
    let first: Vec<_> = (0..3).map(|n| CouplingFamily::first(c(0.3), c(n as f64))).collect();
    let second: Vec<_> = (0..3)
        .map(|n| CouplingFamily::second(c(0.3), c(n as f64), 1))
        .collect::<Result<_>>()?;
    let third: Vec<_> = (0..3)
        .map(|n| CouplingFamily::third(c(0.7), c(n as f64), 1))
        .collect::<Result<_>>()?;
    let items = vec![
        coupling_item(
            &s,
            "first-kappa3",
            "κ₃ of the first family: general formula (n+2μ)(n+2μ+1) vs the κ̃₃ relation",
            &first,
        )?,
        coupling_item(
            &s,
            "second-couplings",
            "second family: ground-state map vs general map (factor 2 in κ₂, offset in κ₃)",
            &second,
        )?,
        coupling_item(
            &s,
            "third-couplings",
            "third family: ground-state map vs general map (factor 2 in κ₂, offset in κ₃)",
            &third,
        )?,
        third_operator_item(&s)?,
        energy_item(&s)?,
    ];
    Ok(DiscrepancyReport {
        tau_im: REPORT_TAU_IM,
        tolerance: cfg.tolerance,
        samples: cfg.samples,
        seed: cfg.seed,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item<'a>(r: &'a DiscrepancyReport, id: &str) -> &'a Discrepancy {
        r.items.iter().find(|i| i.id == id).unwrap()
    }

    #[test]
    fn adjudication() {
        let r = discrepancy_report(&OracleConfig::default()).unwrap();
        assert_eq!(item(&r, "first-kappa3").consistent, ["validated", "printed-tilde-relation", "printed-ground"]);
        assert_eq!(item(&r, "second-couplings").consistent, ["validated"]);
        assert_eq!(item(&r, "third-couplings").consistent, ["validated"]);
        assert_eq!(item(&r, "third-operator-g2-term").consistent, ["corrected"]);
        assert_eq!(item(&r, "first-n1-energy-normalization").consistent, ["energy-minus-half"]);
        for case in &item(&r, "third-operator-g2-term").cases {
            let m: Vec<_> = case.variants.iter().map(|v| v.matches_conjugation).collect();
            assert_eq!(m, [Some(true), Some(false)]);
        }
    }
}
