//! Eigenpairs of the algebraic operators on `P_n` (the BC1 Lamé polynomials),
//! their degeneracy and Jordan structure, and eigenvalue branches in `g2`.
//!
//! Eigenvalues come from the characteristic polynomial. For floats, roots
//! closer than [`CLUSTER_TOL`] (relative to the matrix scale) are merged into
//! one eigenvalue of higher algebraic multiplicity and the geometric
//! multiplicity is the number of singular values of `M − λI` below
//! [`RANK_TOL`]. Rational matrices get an exact squarefree factorization of
//! the characteristic polynomial instead, so degeneracies are decided exactly.

mod branches;
mod charpoly;

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::diffop::{DiffOp, Matrix, Poly, PolySpace};
use crate::elliptic::LatticeInvariants;
use crate::error::{Error, Result};
use crate::model::{build_operator, energy_offset, CouplingFamily};
use crate::scalar::Scalar;

pub use branches::{locate_branch_points, trace_branches, BranchPoint, G2Path, SheetTrace};
pub use charpoly::{characteristic_polynomial, eval_matrix_poly, poly_gcd, polynomial_roots, squarefree_decomposition};

/// Singular values below `RANK_TOL · scale` count as rank deficiency.
pub const RANK_TOL: f64 = 1e-9;

/// Float eigenvalues closer than `CLUSTER_TOL · scale` are one eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    /// Eigenvalue `λ` of the algebraic operator.
    pub h_eigenvalue: Complex64,
    /// `E = E₀ − λ/2`.
    pub energy: Complex64,
    /// Monic in its highest attained degree.
    pub poly: Poly<Complex64>,
    /// Basis of the eigenspace in echelon form; `poly` is its first element.
    pub eigenspace: Vec<Poly<Complex64>>,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
}

impl Eigenpair {
    pub fn is_jordan(&self) -> bool {
        self.geometric_multiplicity < self.algebraic_multiplicity
    }
}

/// Multiplicity data for one distinct eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenStructure<S> {
    pub eigenvalue: Complex64,
    /// Set when the eigenvalue is known exactly (rational backend, rational root).
    pub exact_eigenvalue: Option<S>,
    pub algebraic: usize,
    pub geometric: usize,
    pub eigenvectors: Vec<Poly<Complex64>>,
    pub exact_eigenvectors: Vec<Poly<S>>,
}

impl<S> EigenStructure<S> {
    pub fn is_jordan(&self) -> bool {
        self.geometric < self.algebraic
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport<S> {
    /// Multiplicities were decided in exact arithmetic.
    pub exact: bool,
    pub entries: Vec<EigenStructure<S>>,
}

impl<S> StructureReport<S> {
    pub fn has_jordan_block(&self) -> bool {
        self.entries.iter().any(EigenStructure::is_jordan)
    }

    pub fn is_degenerate(&self) -> bool {
        self.entries.iter().any(|e| e.algebraic > 1)
    }

    pub fn total_algebraic(&self) -> usize {
        self.entries.iter().map(|e| e.algebraic).sum()
    }
}

fn preserving_matrix<S: Scalar>(op: &DiffOp<S>, space: PolySpace) -> Result<Matrix<S>> {
    let sm = op.matrix_on(space);
    if !sm.preserves() {
        return Err(Error::Leakage {
            n: space.n,
            leakage: sm.leakage.norm(),
        });
    }
    Ok(sm.matrix)
}

/// Distinct eigenvalues of `op` on `space` with their multiplicities.
pub fn detect_structure<S: Scalar>(op: &DiffOp<S>, space: PolySpace) -> Result<StructureReport<S>> {
    Ok(matrix_structure(&preserving_matrix(op, space)?))
}

pub fn matrix_structure<S: Scalar>(m: &Matrix<S>) -> StructureReport<S> {
    let mut entries = if S::EXACT {
        exact_structure(m)
    } else {
        float_structure(&m.to_complex())
            .into_iter()
            .map(|e| EigenStructure {
                eigenvalue: e.eigenvalue,
                exact_eigenvalue: None,
                algebraic: e.algebraic,
                geometric: e.geometric,
                eigenvectors: e.eigenvectors,
                exact_eigenvectors: Vec::new(),
            })
            .collect()
    };
    entries.sort_by(|a, b| cmp_complex(a.eigenvalue, b.eigenvalue));
    StructureReport { exact: S::EXACT, entries }
}

/// The `n + 1` eigenvalues of `op` on `P_n` counted with algebraic
/// multiplicity, one [`Eigenpair`] per distinct eigenvalue, sorted by energy.
pub fn eigenpairs<S: Scalar>(op: &DiffOp<S>, space: PolySpace, offset: &S) -> Result<Vec<Eigenpair>> {
    let structure = detect_structure(op, space)?;
    let offset = offset.to_complex();
    let mut out: Vec<Eigenpair> = structure
        .entries
        .into_iter()
        .map(|e| {
            let eigenspace = if e.exact_eigenvectors.is_empty() {
                e.eigenvectors
            } else {
                e.exact_eigenvectors.iter().map(Poly::to_complex).collect()
            };
            Eigenpair {
                h_eigenvalue: e.eigenvalue,
                energy: offset - e.eigenvalue * 0.5,
                poly: eigenspace[0].clone(),
                eigenspace,
                algebraic_multiplicity: e.algebraic,
                geometric_multiplicity: e.geometric,
            }
        })
        .collect();
    out.sort_by(|a, b| cmp_complex(a.energy, b.energy));
    Ok(out)
}

/// Eigenpairs of a family at integer `n`.
pub fn family_eigenpairs<S: Scalar>(fam: &CouplingFamily<S>, inv: &LatticeInvariants<S>) -> Result<Vec<Eigenpair>> {
    let n = fam.require_integer_n()?;
    let op = build_operator(fam, inv)?;
    eigenpairs(&op, PolySpace::new(n), &energy_offset(fam, inv)?)
}

/// `‖op(P) − λP‖∞ / ((1 + |λ|)‖P‖∞)`.
pub fn eigen_residual<S: Scalar>(op: &DiffOp<S>, lambda: Complex64, p: &Poly<Complex64>) -> f64 {
    let image = op.to_complex().apply(p);
    let diff = image - p.scale(&lambda);
    diff.max_abs() / ((1.0 + lambda.norm()) * p.max_abs())
}

/// All eigenvalues with multiplicity, unsorted. Roots of the characteristic
/// polynomial; real matrices give conjugate-symmetric output.
pub fn eigenvalues(m: &Matrix<Complex64>) -> Vec<Complex64> {
    polynomial_roots(&characteristic_polynomial(m))
}

pub(crate) fn cmp_complex(a: Complex64, b: Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn matrix_scale(m: &Matrix<Complex64>) -> f64 {
    m.max_abs().max(1.0)
}

struct FloatEntry {
    eigenvalue: Complex64,
    algebraic: usize,
    geometric: usize,
    eigenvectors: Vec<Poly<Complex64>>,
}

fn float_structure(m: &Matrix<Complex64>) -> Vec<FloatEntry> {
    let scale = matrix_scale(m);
    let real = (0..m.rows()).all(|r| (0..m.cols()).all(|c| m.get(r, c).im == 0.0));
    let vals = eigenvalues(m);
    let clusters = cluster(&vals, CLUSTER_TOL * scale);
    let dm = m.to_nalgebra();
    clusters
        .into_iter()
        .map(|members| {
            let algebraic = members.len();
            let mut lambda = members.iter().map(|&i| vals[i]).sum::<Complex64>() / algebraic as f64;
            if real && algebraic == 1 && lambda.im.abs() <= 1e-10 * scale {
                lambda.im = 0.0;
            }
            let null = null_vectors(&dm, lambda, RANK_TOL * scale, algebraic);
            let (lambda, vectors) = if algebraic == 1 {
                let (l, v) = refine(&dm, lambda, null[0].clone());
                (l, vec![v])
            } else {
                (lambda, null)
            };
            let vectors: Vec<Vec<Complex64>> = vectors.into_iter().map(|v| v.iter().copied().collect()).collect();
            let eigenvectors = canonical_basis(&vectors);
            FloatEntry {
                eigenvalue: lambda,
                algebraic,
                geometric: eigenvectors.len(),
                eigenvectors,
            }
        })
        .collect()
}

/// Single-linkage clusters of values within `tol`, in order of first member.
fn cluster(vals: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..vals.len()).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            if (vals[i] - vals[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; vals.len()];
    for i in 0..vals.len() {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Right singular vectors of `M − λI` with singular value below `tol`; at
/// least one (the smallest) and at most `max`.
fn null_vectors(m: &DMatrix<Complex64>, lambda: Complex64, tol: f64, max: usize) -> Vec<DVector<Complex64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::from_diagonal_element(n, n, lambda);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let count = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= tol)
        .count()
        .clamp(1, max);
    order[..count]
        .iter()
        .map(|&i| v_t.row(i).transpose().map(|c| c.conj()))
        .collect()
}

/// Newton refinement of a simple eigenpair on `[(M − λI)x = 0, x_p = 1]`.
fn refine(m: &DMatrix<Complex64>, lambda: Complex64, x: DVector<Complex64>) -> (Complex64, DVector<Complex64>) {
    let n = m.nrows();
    let p = x.icamax();
    let mut x = &x / x[p];
    let mut lambda = lambda;
    let residual = |l: Complex64, v: &DVector<Complex64>| (m * v - v * l).camax();
    let mut best = (residual(lambda, &x), lambda, x.clone());
    for _ in 0..8 {
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        jac.view_mut((0, 0), (n, n)).copy_from(&(m - DMatrix::from_diagonal_element(n, n, lambda)));
        for i in 0..n {
            jac[(i, n)] = -x[i];
        }
        jac[(n, p)] = Complex64::new(1.0, 0.0);
        let mut rhs = DVector::zeros(n + 1);
        let r = m * &x - &x * lambda;
        for i in 0..n {
            rhs[i] = -r[i];
        }
        rhs[n] = Complex64::new(1.0, 0.0) - x[p];
        let Some(delta) = jac.lu().solve(&rhs) else { break };
        x += delta.rows(0, n);
        lambda += delta[n];
        let res = residual(lambda, &x);
        if res < best.0 {
            best = (res, lambda, x.clone());
        }
        if delta.camax() <= f64::EPSILON * (x.camax() + lambda.norm()) {
            break;
        }
    }
    (best.1, best.2)
}

/// Echelon basis of the span of `vectors` (coefficient vectors in ascending
/// degree), each element monic in its highest degree.
fn canonical_basis<S: Scalar>(vectors: &[Vec<S>]) -> Vec<Poly<S>> {
    let Some(len) = vectors.first().map(Vec::len) else {
        return Vec::new();
    };
    let m = Matrix::from_fn(vectors.len(), len, |r, c| vectors[r][len - 1 - c].clone());
    let (rref, pivots) = m.row_reduce();
    (0..pivots.len())
        .map(|r| Poly::from_coeffs((0..len).rev().map(|c| rref.get(r, c).clone()).collect()))
        .collect()
}

fn exact_structure<S: Scalar>(m: &Matrix<S>) -> Vec<EigenStructure<S>> {
    let n = m.rows();
    let cp = characteristic_polynomial(m);
    let complex_m = m.to_complex();
    let dm = complex_m.to_nalgebra();
    let scale = matrix_scale(&complex_m);
    let mut out = Vec::new();
    for (mult, factor) in squarefree_decomposition(&cp) {
        let deg = factor.degree().expect("nonconstant factor");
        let nullity = n - eval_matrix_poly(&factor, m).rank();
        let geometric = nullity / deg;
        if deg == 1 {
            let lambda = -factor.coeff(0);
            let vecs = m.shifted(&lambda).nullspace();
            let exact_eigenvectors = canonical_basis(&vecs);
            out.push(EigenStructure {
                eigenvalue: lambda.to_complex(),
                exact_eigenvalue: Some(lambda),
                algebraic: mult,
                geometric,
                eigenvectors: exact_eigenvectors.iter().map(Poly::to_complex).collect(),
                exact_eigenvectors,
            });
        } else {
            for lambda in polynomial_roots(&factor.to_complex()) {
                let null = null_vectors(&dm, lambda, RANK_TOL * scale, geometric);
                let (lambda, vectors) = if mult == 1 {
                    let (l, v) = refine(&dm, lambda, null[0].clone());
                    (l, vec![v])
                } else {
                    (lambda, null)
                };
                let vectors: Vec<Vec<Complex64>> = vectors.into_iter().map(|v| v.iter().copied().collect()).collect();
                out.push(EigenStructure {
                    eigenvalue: lambda,
                    exact_eigenvalue: None,
                    algebraic: mult,
                    geometric,
                    eigenvectors: canonical_basis(&vectors),
                    exact_eigenvectors: Vec::new(),
                });
            }
        }
    }
    out
}
