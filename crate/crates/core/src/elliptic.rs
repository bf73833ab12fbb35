//! Weierstrass ℘ on rectangular lattices.
//!
//! `℘` is evaluated by reducing the argument into the centered period cell,
//! halving it until the Laurent series at the origin converges quickly, and
//! doubling back with the duplication formula
//!
//! ```text
//! ℘(2z) = s²/4 − 2℘(z),   s = ℘''(z)/℘'(z) = (6℘² − g2/2)/℘'
//! ℘'(2z) = −(℘'(z) + s·(℘(2z) − ℘(z)))
//! ```
//!
//! The discriminant is `g2³ − 27 g3²` (occasionally misprinted as
//! `g2³ + 27 g3³`; the trigonometric limit is where it vanishes).
//!
//! Roots are ordered by descending real part, then descending imaginary part,
//! so `e_k` means the same root on every run. For a rectangular lattice with
//! real period `L` and imaginary period `iT` this gives
//! `e1 = ℘(L/2) > e2 = ℘((L+iT)/2) > e3 = ℘(iT/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::diffop::Poly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance to a lattice point below which ℘ is refused.
pub const POLE_EXCLUSION: f64 = 1e-10;

const LAURENT_TERMS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeInvariants<S> {
    pub g2: S,
    pub g3: S,
    /// `(e1, e2, e3)` in the documented order.
    pub roots: [S; 3],
    /// `g2³ − 27 g3²`.
    pub discriminant: S,
    /// Set when the discriminant is negligible against `max(1, |g2|³, 27|g3|²)`.
    pub degenerate: bool,
}

impl LatticeInvariants<Complex64> {
    /// Invariants given directly; roots from the cubic.
    pub fn from_invariants(g2: Complex64, g3: Complex64) -> Self {
        let roots = roots_from_invariants(g2, g3);
        let discriminant = g2 * g2 * g2 - 27.0 * g3 * g3;
        let scale = 1f64.max(g2.norm().powi(3)).max(27.0 * g3.norm_sqr());
        LatticeInvariants {
            g2,
            g3,
            roots,
            discriminant,
            degenerate: discriminant.norm() < 1e-12 * scale,
        }
    }

    pub fn from_real(g2: f64, g3: f64) -> Self {
        Self::from_invariants(Complex64::new(g2, 0.0), Complex64::new(g3, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.g2.im == 0.0 && self.g3.im == 0.0
    }

    /// Largest residual `|4e³ − g2 e − g3|` over the three roots.
    pub fn root_residual(&self) -> f64 {
        self.roots
            .iter()
            .map(|&e| cubic_value(self.g2, self.g3, e).norm())
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> LatticeInvariants<S> {
    /// Invariants from two of the roots (the third is `-e1-e2`); exact in
    /// rational arithmetic. The roots are kept in the order given.
    pub fn from_roots(e1: S, e2: S) -> Self {
        let e3 = -(e1.clone() + e2.clone());
        let four = S::from_i64(4);
        let g2 = -(four.clone()
            * (e1.clone() * e2.clone() + e1.clone() * e3.clone() + e2.clone() * e3.clone()));
        let g3 = four * e1.clone() * e2.clone() * e3.clone();
        let discriminant =
            g2.clone() * g2.clone() * g2.clone() - S::from_i64(27) * g3.clone() * g3.clone();
        let degenerate = discriminant.is_zero();
        LatticeInvariants {
            g2,
            g3,
            roots: [e1, e2, e3],
            discriminant,
            degenerate,
        }
    }

    /// `e_k` for `k ∈ {1, 2, 3}`.
    pub fn root(&self, k: usize) -> Result<&S> {
        match k {
            1..=3 => Ok(&self.roots[k - 1]),
            _ => Err(Error::InvalidRootIndex(k)),
        }
    }

    /// The cubic `4τ³ − g2 τ − g3`.
    pub fn cubic(&self) -> Poly<S> {
        Poly::from_coeffs(vec![-self.g3.clone(), -self.g2.clone(), S::zero(), S::from_i64(4)])
    }

    pub fn to_complex(&self) -> LatticeInvariants<Complex64> {
        LatticeInvariants {
            g2: self.g2.to_complex(),
            g3: self.g3.to_complex(),
            roots: [
                self.roots[0].to_complex(),
                self.roots[1].to_complex(),
                self.roots[2].to_complex(),
            ],
            discriminant: self.discriminant.to_complex(),
            degenerate: self.degenerate,
        }
    }
}

fn cubic_value(g2: Complex64, g3: Complex64, e: Complex64) -> Complex64 {
    4.0 * e * e * e - g2 * e - g3
}

/// The three roots of `4e³ − g2 e − g3`, ordered as documented.
///
/// Cardano's formula followed by Newton polishing. Real invariants produce
/// real roots when the discriminant is positive.
pub fn roots_from_invariants(g2: Complex64, g3: Complex64) -> [Complex64; 3] {
    // e³ + p e + q = 0
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let a = -q / 2.0 + disc;
    let b = -q / 2.0 - disc;
    let u3 = if a.norm() >= b.norm() { a } else { b };
    let mut roots = if u3.norm() == 0.0 {
        // p = q = 0
        [Complex64::zero(); 3]
    } else {
        let u = u3.powf(1.0 / 3.0);
        let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let mut out = [Complex64::zero(); 3];
        let mut uk = u;
        for r in out.iter_mut() {
            *r = uk - p / (3.0 * uk);
            uk *= omega;
        }
        out
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = cubic_value(g2, g3, *r);
            let df = 12.0 * *r * *r - g2;
            if df.norm() < 1e-300 || f.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    if g2.im == 0.0 && g3.im == 0.0 {
        // Real cubic: three real roots when g2³ − 27g3² ≥ 0, otherwise one
        // real root and a conjugate pair.
        let disc = g2.re.powi(3) - 27.0 * g3.re * g3.re;
        if disc >= 0.0 {
            for r in roots.iter_mut() {
                *r = Complex64::new(r.re, 0.0);
            }
        } else {
            let i = (0..3)
                .min_by(|&a, &b| roots[a].im.abs().partial_cmp(&roots[b].im.abs()).unwrap())
                .unwrap_or(0);
            roots[i] = Complex64::new(roots[i].re, 0.0);
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let re = (roots[j].re + roots[k].re) / 2.0;
            let im = (roots[j].im.abs() + roots[k].im.abs()) / 2.0;
            roots[j] = Complex64::new(re, im);
            roots[k] = Complex64::new(re, -im);
        }
    }
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    // Near-equal real parts from rounding must not reorder conjugate pairs.
    for i in 0..2 {
        let (a, b) = (roots[i], roots[i + 1]);
        if (a.re - b.re).abs() <= 1e-14 * a.norm().max(1.0) && a.im < b.im {
            roots.swap(i, i + 1);
        }
    }
    roots
}

/// Rectangular period lattice `{m·L + i·k·T}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangularLattice {
    pub real_period: f64,
    /// The imaginary period `T` (the lattice contains `iT`).
    pub tau_im: f64,
}

impl RectangularLattice {
    /// Real period 1 and imaginary period `i·tau_im`.
    pub fn new(tau_im: f64) -> Result<Self> {
        Self::with_periods(1.0, tau_im)
    }

    pub fn with_periods(real_period: f64, tau_im: f64) -> Result<Self> {
        if !(tau_im.is_finite() && tau_im > 0.0) {
            return Err(Error::InvalidLattice(tau_im));
        }
        if !(real_period.is_finite() && real_period > 0.0) {
            return Err(Error::InvalidLattice(real_period));
        }
        Ok(RectangularLattice { real_period, tau_im })
    }

    /// Periods of the lattice with the given real invariants. Needs three
    /// distinct real roots (positive discriminant).
    pub fn from_invariants(inv: &LatticeInvariants<Complex64>) -> Result<Self> {
        let real = inv.is_real() && inv.roots.iter().all(|r| r.im == 0.0);
        if !real || inv.degenerate || inv.discriminant.re <= 0.0 {
            return Err(Error::Config(format!(
                "invariants g2={}, g3={} do not define a rectangular lattice (need real g2, g3 with g2³ − 27g3² > 0)",
                inv.g2, inv.g3
            )));
        }
        let [e1, e2, e3] = inv.roots.map(|r| r.re);
        let omega1 = PI / (2.0 * agm((e1 - e3).sqrt(), (e1 - e2).sqrt()));
        let omega3 = PI / (2.0 * agm((e1 - e3).sqrt(), (e2 - e3).sqrt()));
        Self::with_periods(2.0 * omega1, 2.0 * omega3)
    }

    /// Half-periods `L/2`, `(L+iT)/2`, `iT/2`, matching `e1, e2, e3`.
    pub fn half_periods(&self) -> [Complex64; 3] {
        let l = self.real_period / 2.0;
        let t = self.tau_im / 2.0;
        [Complex64::new(l, 0.0), Complex64::new(l, t), Complex64::new(0.0, t)]
    }

    /// Reduces `x` into the centered cell and returns it.
    pub fn reduce(&self, x: Complex64) -> Complex64 {
        let re = x.re - (x.re / self.real_period).round() * self.real_period;
        let im = x.im - (x.im / self.tau_im).round() * self.tau_im;
        Complex64::new(re, im)
    }

    /// Distance from `x` to the nearest lattice point.
    pub fn distance_to_lattice(&self, x: Complex64) -> f64 {
        self.reduce(x).norm()
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
        if (an - bn).abs() <= 1e-16 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Invariants of a rectangular lattice from the Eisenstein series
/// `g2 = (4π⁴/3)E4`, `g3 = (8π⁶/27)E6`, and the discriminant from the
/// product `(2π)¹² q ∏(1 − qⁿ)²⁴`. The nome is kept small by exchanging the
/// periods when the cell is taller than wide.
pub fn invariants_from_lattice(lat: &RectangularLattice) -> Result<LatticeInvariants<Complex64>> {
    let t = lat.tau_im / lat.real_period;
    let (mut g2, mut g3, mut disc) = if t >= 1.0 {
        unit_lattice_series(t)?
    } else {
        // Z + itZ = (it)·(Z + (i/t)Z)
        let (g2, g3, d) = unit_lattice_series(1.0 / t)?;
        (g2 / t.powi(4), -g3 / t.powi(6), d / t.powi(12))
    };
    let l = lat.real_period;
    g2 /= l.powi(4);
    g3 /= l.powi(6);
    disc /= l.powi(12);
    if disc == 0.0 || !disc.is_finite() {
        return Err(Error::DegenerateLattice(disc));
    }
    let roots = roots_from_invariants(Complex64::new(g2, 0.0), Complex64::new(g3, 0.0));
    Ok(LatticeInvariants {
        g2: Complex64::new(g2, 0.0),
        g3: Complex64::new(g3, 0.0),
        roots,
        discriminant: Complex64::new(disc, 0.0),
        degenerate: false,
    })
}

/// `(g2, g3, Δ)` for the lattice `Z + i t Z`, `t ≥ 1`.
fn unit_lattice_series(t: f64) -> Result<(f64, f64, f64)> {
    const MAX_TERMS: usize = 4000;
    let q = (-2.0 * PI * t).exp();
    let mut e4 = 1.0;
    let mut e6 = 1.0;
    let mut qn = 1.0;
    let mut converged = false;
    for n in 1..=MAX_TERMS {
        qn *= q;
        let (s3, s5) = divisor_sums(n);
        let t4 = 240.0 * s3 * qn;
        let t6 = 504.0 * s5 * qn;
        e4 += t4;
        e6 -= t6;
        if t4.abs() <= 1e-18 * e4.abs() && t6.abs() <= 1e-18 * e6.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SeriesNotConverged { terms: MAX_TERMS });
    }
    let mut eta24 = q;
    let mut qn = 1.0;
    for _ in 1..=MAX_TERMS {
        qn *= q;
        if qn < 1e-20 {
            break;
        }
        eta24 *= (1.0 - qn).powi(24);
    }
    let g2 = 4.0 * PI.powi(4) / 3.0 * e4;
    let g3 = 8.0 * PI.powi(6) / 27.0 * e6;
    let disc = (2.0 * PI).powi(12) * eta24;
    Ok((g2, g3, disc))
}

fn divisor_sums(n: usize) -> (f64, f64) {
    let mut s3 = 0.0;
    let mut s5 = 0.0;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            let d = d as f64;
            s3 += d.powi(3);
            s5 += d.powi(5);
        }
    }
    (s3, s5)
}

/// ℘ and ℘′ for one lattice.
#[derive(Clone, Debug)]
pub struct Weierstrass {
    g2: Complex64,
    g3: Complex64,
    lattice: RectangularLattice,
    /// `laurent[k]` multiplies `z^(2k-2)`; entries 0 and 1 are unused.
    laurent: Vec<Complex64>,
    real_data: bool,
}

impl Weierstrass {
    pub fn new(inv: &LatticeInvariants<Complex64>, lattice: RectangularLattice) -> Result<Self> {
        if inv.degenerate {
            return Err(Error::DegenerateLattice(inv.discriminant.norm()));
        }
        let mut c = vec![Complex64::zero(); LAURENT_TERMS + 1];
        c[2] = inv.g2 / 20.0;
        c[3] = inv.g3 / 28.0;
        for k in 4..=LAURENT_TERMS {
            let s: Complex64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
            c[k] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
        }
        Ok(Weierstrass {
            g2: inv.g2,
            g3: inv.g3,
            lattice,
            laurent: c,
            real_data: inv.is_real(),
        })
    }

    pub fn from_lattice(lattice: RectangularLattice) -> Result<Self> {
        Self::new(&invariants_from_lattice(&lattice)?, lattice)
    }

    pub fn lattice(&self) -> &RectangularLattice {
        &self.lattice
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    pub fn wp(&self, x: Complex64) -> Result<Complex64> {
        self.wp_and_prime(x).map(|(p, _)| p)
    }

    pub fn wp_prime(&self, x: Complex64) -> Result<Complex64> {
        self.wp_and_prime(x).map(|(_, d)| d)
    }

    /// `(℘(x), ℘′(x))`.
    pub fn wp_and_prime(&self, x: Complex64) -> Result<(Complex64, Complex64)> {
        self.wp_and_prime_near(x, x)
    }

    /// Like [`wp_and_prime`](Self::wp_and_prime), but the period translation
    /// and the number of argument halvings are those chosen for `anchor`.
    /// Points near a common anchor then follow one arithmetic path, which
    /// keeps rounding errors smooth in `x` (needed by finite differences).
    pub fn wp_and_prime_near(&self, x: Complex64, anchor: Complex64) -> Result<(Complex64, Complex64)> {
        let shift = anchor - self.lattice.reduce(anchor);
        let z0 = x - shift;
        let r = z0.norm();
        if r < POLE_EXCLUSION {
            return Err(Error::PoleProximity {
                x: format!("{x}"),
                distance: r,
            });
        }
        let rho = self.lattice.real_period.min(self.lattice.tau_im);
        let mut a = self.lattice.reduce(anchor).norm();
        let mut doublings = 0;
        while a > rho / 4.0 {
            a /= 2.0;
            doublings += 1;
        }
        let z = z0 / f64::powi(2.0, doublings);
        let (mut p, mut dp) = self.laurent_at(z);
        for _ in 0..doublings {
            let s = (6.0 * p * p - self.g2 / 2.0) / dp;
            let p2 = s * s / 4.0 - 2.0 * p;
            let dp2 = -(dp + s * (p2 - p));
            p = p2;
            dp = dp2;
        }
        if self.real_data && x.im == 0.0 {
            p = Complex64::new(p.re, 0.0);
            dp = Complex64::new(dp.re, 0.0);
        }
        Ok((p, dp))
    }

    fn laurent_at(&self, z: Complex64) -> (Complex64, Complex64) {
        let z2 = z * z;
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        // Horner in z² from the top term down.
        for k in (2..=LAURENT_TERMS).rev() {
            p = p * z2 + self.laurent[k];
            dp = dp * z2 + self.laurent[k] * (2 * k - 2) as f64;
        }
        // p holds Σ c_k z^(2k-4); dp holds Σ (2k-2) c_k z^(2k-4)
        let inv_z2 = 1.0 / z2;
        (inv_z2 + p * z2, -2.0 * inv_z2 / z + dp * z)
    }

    /// Residual of the defining equation `℘′² − (4℘³ − g2℘ − g3)` at `x`.
    pub fn ode_residual(&self, x: Complex64) -> Result<f64> {
        let (p, dp) = self.wp_and_prime(x)?;
        Ok((dp * dp - cubic_value(self.g2, self.g3, p)).norm())
    }

    /// Natural magnitude of the terms of `4℘³ − g2℘ − g3` at `x`:
    /// `max(1, |℘|³, |g2 ℘|, |g3|)`.
    pub fn ode_scale(&self, x: Complex64) -> Result<f64> {
        let p = self.wp(x)?.norm();
        Ok(1f64.max(p.powi(3)).max(self.g2.norm() * p).max(self.g3.norm()))
    }
}

/// ℘(x) for the given invariants and lattice.
pub fn wp(x: Complex64, inv: &LatticeInvariants<Complex64>, lat: &RectangularLattice) -> Result<Complex64> {
    Weierstrass::new(inv, *lat)?.wp(x)
}

/// ℘′(x) for the given invariants and lattice.
pub fn wp_prime(
    x: Complex64,
    inv: &LatticeInvariants<Complex64>,
    lat: &RectangularLattice,
) -> Result<Complex64> {
    Weierstrass::new(inv, *lat)?.wp_prime(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_4e3_minus_4e() {
        let r = roots_from_invariants(c(4.0, 0.0), c(0.0, 0.0));
        assert_eq!(r, [c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn roots_of_4e3_minus_4_are_cube_roots_of_unity() {
        let r = roots_from_invariants(c(0.0, 0.0), c(4.0, 0.0));
        let h = 3f64.sqrt() / 2.0;
        let expected = [c(1.0, 0.0), c(-0.5, h), c(-0.5, -h)];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).norm() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn generic_roots_have_small_residual() {
        let inv = LatticeInvariants::from_real(7.0, 2.0);
        assert!(inv.root_residual() < 1e-12 * 7.0);
        let sum: Complex64 = inv.roots.iter().sum();
        assert!(sum.norm() < 1e-12);
        let inv = LatticeInvariants::from_invariants(c(1.5, -2.0), c(0.3, 0.7));
        assert!(inv.root_residual() < 1e-12 * 2.5);
    }

    #[test]
    fn degenerate_invariants_are_flagged() {
        assert!(LatticeInvariants::from_real(0.0, 0.0).degenerate);
        assert!(LatticeInvariants::from_real(3.0, 1.0).degenerate);
        assert!(!LatticeInvariants::from_real(4.0, 0.0).degenerate);
    }

    #[test]
    fn exact_invariants_from_roots() {
        let inv = LatticeInvariants::<BigRational>::from_roots(
            BigRational::from_i64(1),
            BigRational::from_i64(0),
        );
        assert_eq!(inv.g2, BigRational::from_i64(4));
        assert_eq!(inv.g3, BigRational::from_i64(0));
        assert_eq!(inv.cubic(), Poly::from_i64(&[0, -4, 0, 4]));
        assert!(matches!(inv.root(4), Err(Error::InvalidRootIndex(4))));
    }

    #[test]
    fn square_lattice_is_lemniscatic() {
        let inv = invariants_from_lattice(&RectangularLattice::new(1.0).unwrap()).unwrap();
        assert!(inv.g2.re > 0.0);
        assert!(inv.g3.norm() < 1e-12 * inv.g2.norm());
        assert!(inv.discriminant.re > 0.0);
    }

    #[test]
    fn tall_lattice_approaches_trigonometric_limit() {
        let inv = invariants_from_lattice(&RectangularLattice::new(20.0).unwrap()).unwrap();
        let ratio = inv.g3.re / inv.g2.re;
        assert!((ratio - 2.0 * PI * PI / 9.0).abs() < 1e-8);
        assert!(inv.discriminant.re > 0.0);
    }

    #[test]
    fn wide_and_tall_lattices_agree_under_exchange() {
        // The lattice with periods (1, 0.5i) is 0.5i times the one with (1, 2i)
        let a = invariants_from_lattice(&RectangularLattice::new(0.5).unwrap()).unwrap();
        let b = invariants_from_lattice(&RectangularLattice::with_periods(1.0, 2.0).unwrap()).unwrap();
        assert!((a.g2.re - b.g2.re * 16.0).abs() < 1e-9 * a.g2.re.abs());
        assert!((a.g3.re + b.g3.re * 64.0).abs() < 1e-9 * a.g3.re.abs());
    }

    #[test]
    fn lattice_rejects_nonpositive_period() {
        assert!(RectangularLattice::new(0.0).is_err());
        assert!(RectangularLattice::new(-1.0).is_err());
        assert!(RectangularLattice::new(f64::NAN).is_err());
    }

    #[test]
    fn wp_symmetries() {
        let w = Weierstrass::from_lattice(RectangularLattice::new(1.3).unwrap()).unwrap();
        let x = c(0.3, 0.0);
        assert_eq!(w.wp(-x).unwrap(), w.wp(x).unwrap());
        let shifted = w.wp(x + 1.0).unwrap();
        assert!((shifted - w.wp(x).unwrap()).norm() < 1e-12 * shifted.norm());
        assert!((w.wp_prime(-x).unwrap() + w.wp_prime(x).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn pole_is_refused() {
        let w = Weierstrass::from_lattice(RectangularLattice::new(1.0).unwrap()).unwrap();
        assert!(matches!(w.wp(c(1.0, 0.0)), Err(Error::PoleProximity { .. })));
        assert!(w.wp(c(1e-9, 0.0)).is_ok());
    }

    fn sample_points(n: usize, seed: u64) -> Vec<Complex64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.random_range(0.05..0.95), rng.random_range(-0.6..0.6)))
            .collect()
    }

    #[test]
    fn ode_residual_at_random_points() {
        for tau_im in [0.4, 1.0, 1.7, 3.0] {
            let w = Weierstrass::from_lattice(RectangularLattice::new(tau_im).unwrap()).unwrap();
            for x in sample_points(100, 7) {
                let x = c(x.re, x.im * tau_im);
                let scale = w.ode_scale(x).unwrap();
                let r = w.ode_residual(x).unwrap();
                assert!(r < 1e-10 * scale, "tau_im={tau_im} x={x} residual={r:e}");
            }
        }
    }

    #[test]
    fn half_periods_hit_roots() {
        for tau_im in [0.5, 1.0, 2.0, 3.0] {
            let lat = RectangularLattice::new(tau_im).unwrap();
            let inv = invariants_from_lattice(&lat).unwrap();
            let w = Weierstrass::new(&inv, lat).unwrap();
            for (k, h) in lat.half_periods().iter().enumerate() {
                let (p, dp) = w.wp_and_prime(*h).unwrap();
                let e = inv.roots[k].norm().max(1.0);
                assert!((p - inv.roots[k]).norm() < 1e-10 * e, "tau_im={tau_im} k={k}: {p} vs {}", inv.roots[k]);
                assert!(dp.norm() < 1e-10 * e.powf(1.5), "tau_im={tau_im} k={k}: wp' = {dp}");
            }
        }
    }

    #[test]
    fn periodicity_along_both_periods() {
        let lat = RectangularLattice::new(1.4).unwrap();
        let w = Weierstrass::from_lattice(lat).unwrap();
        for x in sample_points(20, 3) {
            let p = w.wp(x).unwrap();
            let tol = 1e-12 * p.norm().max(1.0);
            assert!((w.wp(x + 1.0).unwrap() - p).norm() < tol);
            assert!((w.wp(x + c(0.0, 1.4)).unwrap() - p).norm() < tol);
        }
    }

    #[test]
    fn periods_from_invariants_roundtrip() {
        let inv = LatticeInvariants::from_real(3.0, 0.5);
        let lat = RectangularLattice::from_invariants(&inv).unwrap();
        let back = invariants_from_lattice(&lat).unwrap();
        assert!((back.g2 - inv.g2).norm() < 1e-10);
        assert!((back.g3 - inv.g3).norm() < 1e-10);
        assert!(RectangularLattice::from_invariants(&LatticeInvariants::from_real(0.0, 1.0)).is_err());
    }
}
