//! Characteristic polynomials, polynomial roots and squarefree factorization.

use num_complex::Complex64;

use crate::diffop::{Matrix, Poly};
use crate::scalar::Scalar;

/// Monic `det(λI − M)`.
///
/// Upper Hessenberg matrices (every family operator on `P_n`) use the
/// Hessenberg recurrence; anything else falls back to Faddeev-LeVerrier.
pub fn characteristic_polynomial<S: Scalar>(m: &Matrix<S>) -> Poly<S> {
    assert_eq!(m.rows(), m.cols(), "characteristic polynomial of a non-square matrix");
    if m.is_upper_hessenberg() {
        hessenberg(m)
    } else {
        faddeev_leverrier(m)
    }
}

fn hessenberg<S: Scalar>(h: &Matrix<S>) -> Poly<S> {
    let n = h.rows();
    let mut p: Vec<Poly<S>> = vec![Poly::one()];
    for k in 0..n {
        let mut next = Poly::from_coeffs(vec![-h.get(k, k).clone(), S::one()]) * p[k].clone();
        let mut sub = S::one();
        for i in (0..k).rev() {
            sub = sub * h.get(i + 1, i).clone();
            let c = h.get(i, k).clone() * sub.clone();
            if !c.is_zero() {
                next = next - p[i].scale(&c);
            }
        }
        p.push(next);
    }
    p.pop().expect("recurrence starts non-empty")
}

fn faddeev_leverrier<S: Scalar>(a: &Matrix<S>) -> Poly<S> {
    let n = a.rows();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        mk = (a * &mk).add(&Matrix::identity(n).scale(&coeffs[n + 1 - k]));
        coeffs[n - k] = -(a * &mk).trace() / S::from_i64(k as i64);
    }
    Poly::from_coeffs(coeffs)
}

/// All complex roots of `p`, with multiplicity, by Aberth-Ehrlich iteration.
///
/// Exact zero roots are deflated first, so a nilpotent matrix gives exact zeros.
pub fn polynomial_roots(p: &Poly<Complex64>) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = p.coeffs();
    let lead_zeros = coeffs.iter().take_while(|c| **c == zero).count();
    let mut roots = vec![zero; lead_zeros];
    let q = Poly::from_coeffs(coeffs[lead_zeros..].to_vec()).monic();
    let d = q.degree().unwrap_or(0);
    if d == 0 {
        return roots;
    }
    if d == 1 {
        roots.push(-q.coeff(0));
        return roots;
    }
    let dq = q.derivative();
    // Fujiwara bound on the root moduli
    let radius = (1..=d)
        .map(|i| {
            let c = q.coeff(d - i).norm();
            if i == d { (c / 2.0).powf(1.0 / i as f64) } else { c.powf(1.0 / i as f64) }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..d)
        .map(|j| Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / d as f64 + 0.4))
        .collect();
    let mut done = vec![false; d];
    for _ in 0..2000 {
        let mut moved = false;
        for j in 0..d {
            if done[j] {
                continue;
            }
            let pz = q.eval_complex(z[j]);
            if pz == zero {
                done[j] = true;
                continue;
            }
            let w = pz / dq.eval_complex(z[j]);
            let s: Complex64 = (0..d)
                .filter(|&k| k != j)
                .map(|k| {
                    let diff = z[j] - z[k];
                    if diff == zero { zero } else { diff.inv() }
                })
                .sum();
            let corr = w / (Complex64::new(1.0, 0.0) - w * s);
            if !corr.is_finite() {
                continue;
            }
            z[j] -= corr;
            if corr.norm() <= 4.0 * f64::EPSILON * z[j].norm().max(f64::MIN_POSITIVE) {
                done[j] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    if q.coeffs().iter().all(|c| c.im == 0.0) {
        // real polynomial: rounding leaves tiny imaginary parts on real roots
        for r in &mut z {
            if r.im.abs() <= 64.0 * f64::EPSILON * r.norm() {
                r.im = 0.0;
            }
        }
    }
    roots.extend(z);
    roots
}

/// Greatest common divisor, monic. Intended for exact scalars.
pub fn poly_gcd<S: Scalar>(a: &Poly<S>, b: &Poly<S>) -> Poly<S> {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let (_, r) = a.div_rem(&b);
        a = b;
        b = r;
    }
    a.monic()
}

/// Yun's squarefree decomposition: `f = c · ∏ a_i^i` with each `a_i` monic
/// and squarefree. Returns `(i, a_i)` for the nonconstant factors. Exact
/// scalars only.
pub fn squarefree_decomposition<S: Scalar>(f: &Poly<S>) -> Vec<(usize, Poly<S>)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    let a0 = poly_gcd(f, &df);
    let mut b = f.div_rem(&a0).0;
    let c = df.div_rem(&a0).0;
    let mut d = c - b.derivative();
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = poly_gcd(&b, &d);
        let nb = b.div_rem(&a).0;
        let nc = d.div_rem(&a).0;
        if a.degree().unwrap_or(0) > 0 {
            out.push((i, a));
        }
        d = nc - nb.derivative();
        b = nb;
        i += 1;
    }
    out
}

/// `p(M)` by Horner's rule.
pub fn eval_matrix_poly<S: Scalar>(p: &Poly<S>, m: &Matrix<S>) -> Matrix<S> {
    let n = m.rows();
    p.coeffs().iter().rev().fold(Matrix::zeros(n, n), |acc, c| {
        (&acc * m).add(&Matrix::identity(n).scale(c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn hessenberg_and_faddeev_leverrier_agree() {
        let h = Matrix::from_fn(4, 4, |r, c| if r <= c + 1 { q((3 * r + 5 * c) as i64 % 7 - 3) } else { q(0) });
        assert!(h.is_upper_hessenberg());
        assert_eq!(hessenberg(&h), faddeev_leverrier(&h));
        let full = Matrix::from_fn(3, 3, |r, c| q((r * r + 2 * c) as i64 - 2));
        let p = characteristic_polynomial(&full);
        // Cayley-Hamilton
        let pm = eval_matrix_poly(&p, &full);
        assert_eq!(pm, Matrix::zeros(3, 3));
    }

    #[test]
    fn roots_of_known_polynomials() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let want = [c(1.0, 0.0), c(-2.0, 0.5), c(3.0, -1.0), c(0.0, 0.0)];
        let p = Poly::from_roots(&want);
        let mut got = polynomial_roots(&p);
        for w in want {
            let (idx, d) = got
                .iter()
                .enumerate()
                .map(|(i, g)| (i, (g - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-12, "{w} missed by {d}");
            got.remove(idx);
        }
    }

    #[test]
    fn squarefree_parts() {
        // (τ−1)² (τ+2)³ (τ² + 1)
        let p = Poly::<Q>::from_roots(&[q(1), q(1), q(-2), q(-2), q(-2)]) * Poly::from_i64(&[1, 0, 1]);
        let parts = squarefree_decomposition(&p);
        assert_eq!(
            parts,
            vec![
                (1, Poly::from_i64(&[1, 0, 1])),
                (2, Poly::from_roots(&[q(1)])),
                (3, Poly::from_roots(&[q(-2)])),
            ]
        );
        assert_eq!(squarefree_decomposition(&Poly::<Q>::monomial(q(1), 2)), vec![(2, Poly::tau())]);
    }
}
