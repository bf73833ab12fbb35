//! Independent x-space check of the τ-space results.
//!
//! A polynomial eigenfunction `P` is turned back into
//! `Ψ(x) = P(℘(x)) · (℘′(x))^a · ∏ (℘(x) − e_i)^{b_i}` (principal branches)
//! and the Hamiltonian `H = −½∂ₓ² + κ₂℘(2x) + κ₃℘(x)` is applied directly
//! in `x`. `Ψ″` comes from the chain rule with `℘″ = 6℘² − g2/2`; the
//! finite-difference routines below cross-check that derivative (they alone
//! cannot reach the residual tolerance once `|Ψ″/Ψ|` is large). Nothing here
//! uses the algebraic operators, so a small
//! residual `|HΨ − EΨ| / |Ψ|` confirms the coupling map, the gauge factor and
//! the energy normalization at once.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diffop::Poly;
use crate::elliptic::{LatticeInvariants, Weierstrass};
use crate::error::{Error, Result};
use crate::model::{coupling_map, gauge_factor, CouplingConstants, CouplingFamily, GaugeFactor};
use crate::scalar::principal_pow;
use crate::spectrum::Eigenpair;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 25;
pub const DEFAULT_SEED: u64 = 0xBC1;
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Sample points keep this distance (in units of the real period) from
/// `0`, `½` and `1`, where `℘` has a pole or `℘′` vanishes.
pub const EXCLUSION: f64 = 0.05;

/// Central second-derivative weights on `−4h..4h`, eighth order.
const STENCIL: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Halvings of the finite-difference step per point.
const LEVELS: usize = 6;

/// How `Ψ″` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Derivative {
    /// Chain rule through `℘′` and `℘″ = 6℘² − g2/2`.
    #[default]
    ChainRule,
    /// Eighth-order central differences with Richardson refinement. Rounding
    /// in `Ψ` limits this to roughly `1e-8` relative once `|Ψ″/Ψ| ≳ 10³`.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub floor: f64,
    pub derivative: Derivative,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tolerance: DEFAULT_TOLERANCE,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            floor: RESIDUAL_FLOOR,
            derivative: Derivative::ChainRule,
        }
    }
}

/// `Ψ(x)` for one polynomial eigenfunction.
#[derive(Clone, Debug)]
pub struct Wavefunction {
    poly: Poly<Complex64>,
    gauge: GaugeFactor<Complex64>,
    roots: [Complex64; 3],
    wp: Weierstrass,
}

impl Wavefunction {
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.eval_near(x, x)
    }

    /// `Ψ(x)` evaluated along the arithmetic path chosen for `anchor`; see
    /// [`Weierstrass::wp_and_prime_near`].
    pub fn eval_near(&self, x: f64, anchor: f64) -> Result<Complex64> {
        let (tau, dtau, diffs) = self
            .local_values(Complex64::new(x, 0.0), Complex64::new(anchor, 0.0))
            .map_err(|e| Error::Oracle { x, reason: e.to_string() })?;
        let mut v = self.poly.eval_complex(tau) * principal_pow(dtau, self.gauge.prime_exponent);
        for (d, b) in diffs.iter().zip(&self.gauge.root_exponents) {
            if *b != Complex64::new(0.0, 0.0) {
                v *= principal_pow(*d, *b);
            }
        }
        Ok(v)
    }

    /// `(Ψ(x), Ψ″(x))`.
    pub fn eval_with_second_derivative(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let xc = Complex64::new(x, 0.0);
        let (tau, d1, diffs) = self
            .local_values(xc, xc)
            .map_err(|e| Error::Oracle { x, reason: e.to_string() })?;
        let g2 = self.wp.g2();
        let d2 = 6.0 * tau * tau - g2 / 2.0;
        let d3 = 12.0 * tau * d1;
        let zero = Complex64::new(0.0, 0.0);
        let a = self.gauge.prime_exponent;
        let mut g = principal_pow(d1, a);
        // l1 = G′/G, dl1 = (G′/G)′
        let (mut l1, mut dl1) = if a == zero {
            (zero, zero)
        } else {
            let r = d2 / d1;
            (a * r, a * (d3 / d1 - r * r))
        };
        for (d, b) in diffs.iter().zip(&self.gauge.root_exponents) {
            if *b != zero {
                g *= principal_pow(*d, *b);
                let r = d1 / d;
                l1 += b * r;
                dl1 += b * (d2 / d - r * r);
            }
        }
        let dp = self.poly.derivative();
        let ddp = dp.derivative();
        let (p, p1, p2) = (self.poly.eval_complex(tau), dp.eval_complex(tau), ddp.eval_complex(tau));
        let psi2 = g * (p2 * d1 * d1 + p1 * d2 + 2.0 * p1 * d1 * l1 + p * (dl1 + l1 * l1));
        Ok((g * p, psi2))
    }

    /// `℘(x)` with the same half-period care as the wavefunction.
    pub fn wp_at(&self, x: f64) -> Result<Complex64> {
        let xc = Complex64::new(x, 0.0);
        self.local_values(xc, xc)
            .map(|v| v.0)
            .map_err(|e| Error::Oracle { x, reason: e.to_string() })
    }

    /// `(℘, ℘′, [℘ − e_i])` at `x`. Close to a half-period `ω_j` the values
    /// come from `℘(ω_j + y) − e_j = (e_j − e_k)(e_j − e_l) / (℘(y) − e_j)`,
    /// which keeps full relative precision where `℘ − e_j` and `℘′` vanish.
    fn local_values(&self, x: Complex64, anchor: Complex64) -> Result<(Complex64, Complex64, [Complex64; 3])> {
        let lat = self.wp.lattice();
        let e = self.roots;
        let half = lat.half_periods();
        let near = half
            .iter()
            .map(|w| lat.reduce(anchor - w))
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .filter(|(_, y)| y.norm() < lat.reduce(anchor).norm());
        let Some((j, _)) = near else {
            let (tau, dtau) = self.wp.wp_and_prime_near(x, anchor)?;
            return Ok((tau, dtau, e.map(|r| tau - r)));
        };
        let (py, dpy) = self.wp.wp_and_prime_near(x - half[j], anchor - half[j])?;
        let (k, l) = ((j + 1) % 3, (j + 2) % 3);
        let a = (e[j] - e[k]) * (e[j] - e[l]);
        let q = py - e[j];
        let dj = a / q;
        let dtau = -a * dpy / (q * q);
        let mut diffs = [dj; 3];
        for i in [k, l] {
            diffs[i] = (e[j] - e[i]) + dj;
        }
        Ok((e[j] + dj, dtau, diffs))
    }

    pub fn weierstrass(&self) -> &Weierstrass {
        &self.wp
    }
}

/// `Ψ(x) = P(℘(x)) · Ψ₀(x)` for the family's gauge factor.
pub fn reconstruct(
    fam: &CouplingFamily<Complex64>,
    inv: &LatticeInvariants<Complex64>,
    wp: &Weierstrass,
    poly: &Poly<Complex64>,
) -> Wavefunction {
    Wavefunction {
        poly: poly.clone(),
        gauge: gauge_factor(fam),
        roots: inv.roots,
        wp: wp.clone(),
    }
}

/// `℘(2x)` from `τ = ℘(x)`:
/// `τ/4 + (12g2τ² + 36g3τ + g2²) / (16(4τ³ − g2τ − g3))`.
pub fn wp_double_rational(tau: Complex64, g2: Complex64, g3: Complex64) -> Complex64 {
    let r = 4.0 * tau * tau * tau - g2 * tau - g3;
    tau / 4.0 + (12.0 * g2 * tau * tau + 36.0 * g3 * tau + g2 * g2) / (16.0 * r)
}

/// Potential `κ₂℘(2x) + κ₃℘(x)` written in `τ = ℘(x)`.
pub fn potential_tau(c: &CouplingConstants<Complex64>, tau: Complex64, g2: Complex64, g3: Complex64) -> Complex64 {
    c.kappa2 * wp_double_rational(tau, g2, g3) + c.kappa3 * tau
}

/// Coefficient of `τ` in the potential: `(κ₂ + 4κ₃)/4`.
pub fn potential_linear_coefficient(c: &CouplingConstants<Complex64>) -> Complex64 {
    (c.kappa2 + 4.0 * c.kappa3) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WpDouble {
    pub direct: Complex64,
    pub rational: Complex64,
    pub relative_difference: f64,
}

/// `℘(2x)` evaluated directly and through the duplication formula.
pub fn wp_double(x: Complex64, wp: &Weierstrass) -> Result<WpDouble> {
    let direct = wp.wp(2.0 * x)?;
    let tau = wp.wp(x)?;
    let rational = wp_double_rational(tau, wp.g2(), wp.g3());
    Ok(WpDouble {
        direct,
        rational,
        relative_difference: (direct - rational).norm() / direct.norm().max(1.0),
    })
}

/// One level of the eighth-order second-derivative stencil.
pub fn fd_second_derivative(f: &impl Fn(f64) -> Result<Complex64>, x: f64, h: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, w) in STENCIL.iter().enumerate() {
        acc += f(x + (j as f64 - 4.0) * h)? * *w;
    }
    Ok(acc / (h * h))
}

/// Second derivative by step halving with a Richardson table that removes
/// the `h⁸, h¹⁰, …` error terms in turn. The diagonal entry that changes
/// least from its predecessor is returned, with that change as an error
/// estimate; further down the table roundoff (growing like `h⁻²`) takes over.
pub fn second_derivative(f: &impl Fn(f64) -> Result<Complex64>, x: f64, h0: f64) -> Result<(Complex64, f64)> {
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let mut row = vec![fd_second_derivative(f, x, h0 / f64::powi(2.0, k as i32))?];
        for j in 1..=k {
            let p = f64::powi(2.0, 8 + 2 * (j as i32 - 1));
            row.push((p * row[j - 1] - table[k - 1][j - 1]) / (p - 1.0));
        }
        table.push(row);
    }
    let (best, err) = (1..LEVELS)
        .map(|k| (table[k][k], (table[k][k] - table[k - 1][k - 1]).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two levels");
    let scale = best.norm().max(f(x)?.norm());
    if !(err <= 1e-3 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Oracle {
            x,
            reason: format!("finite-difference refinement did not converge (change {err:e})"),
        });
    }
    Ok((best, err))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sample_points: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max: f64,
    pub median: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Deterministic sample points in `(0, L)`, at least [`EXCLUSION`]·L away
/// from `0`, `L/2` and `L`.
pub fn sample_points(real_period: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: f64 = rng.random_range(EXCLUSION..1.0 - EXCLUSION);
        if (u - 0.5).abs() > EXCLUSION {
            out.push(u * real_period);
        }
    }
    out
}

/// Distance of `x` to the nearest of `0, L/2, L` (in the period cell).
fn distance_to_excluded(x: f64, real_period: f64) -> f64 {
    let u = x / real_period;
    let u = u - u.floor();
    [u, (u - 0.5).abs(), 1.0 - u].into_iter().fold(f64::INFINITY, f64::min) * real_period
}

/// Pointwise `|(HΨ)(x) − EΨ(x)| / max(|Ψ(x)|, floor)`.
pub fn pointwise_residual(
    psi: &Wavefunction,
    couplings: &CouplingConstants<Complex64>,
    energy: Complex64,
    x: f64,
    floor: f64,
    method: Derivative,
) -> Result<f64> {
    let (value, d2) = match method {
        Derivative::ChainRule => psi.eval_with_second_derivative(x)?,
        Derivative::FiniteDifference => {
            let f = |t: f64| psi.eval_near(t, x);
            let h0 = distance_to_excluded(x, psi.wp.lattice().real_period) / 8.0;
            (f(x)?, second_derivative(&f, x, h0)?.0)
        }
    };
    let tau = psi.wp_at(x)?;
    let h_psi = -0.5 * d2 + potential_tau(couplings, tau, psi.wp.g2(), psi.wp.g3()) * value;
    Ok((h_psi - energy * value).norm() / value.norm().max(floor))
}

/// Residual report of `(P, E)` against the Hamiltonian with `couplings`.
pub fn residual(
    fam: &CouplingFamily<Complex64>,
    inv: &LatticeInvariants<Complex64>,
    wp: &Weierstrass,
    poly: &Poly<Complex64>,
    energy: Complex64,
    couplings: &CouplingConstants<Complex64>,
    cfg: &OracleConfig,
) -> Result<ResidualReport> {
    let psi = reconstruct(fam, inv, wp, poly);
    let points = sample_points(wp.lattice().real_period, cfg.samples, cfg.seed);
    let residuals = points
        .iter()
        .map(|&x| pointwise_residual(&psi, couplings, energy, x, cfg.floor, cfg.derivative))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(points, residuals, cfg.tolerance))
}

/// [`residual`] for an eigenpair with the validated couplings.
pub fn eigenpair_residual(
    fam: &CouplingFamily<Complex64>,
    inv: &LatticeInvariants<Complex64>,
    wp: &Weierstrass,
    eig: &Eigenpair,
    cfg: &OracleConfig,
) -> Result<ResidualReport> {
    residual(fam, inv, wp, &eig.poly, eig.energy, &coupling_map(fam), cfg)
}

fn summarize(sample_points: Vec<f64>, residuals: Vec<f64>, tolerance: f64) -> ResidualReport {
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let median = match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    };
    ResidualReport {
        sample_points,
        residuals,
        max,
        median,
        tolerance,
        pass: max < tolerance,
    }
}
