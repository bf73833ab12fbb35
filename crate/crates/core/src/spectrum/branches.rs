//! Continuation of the finite spectrum along paths in the `g2` plane.
//!
//! The energies are branches of an `(n+1)`-sheeted function of `g2`. Along a
//! path the eigenvalue sets at consecutive points are matched by the
//! assignment of least total displacement; a step is accepted only if every
//! branch moves by less than half its distance to the nearest other
//! eigenvalue, otherwise the step is halved. The roots `e_k` entering the
//! second and third families are continued the same way, so `k` keeps
//! labelling the root it started with.

use itertools::Itertools;
use num_complex::Complex64;

use crate::diffop::PolySpace;
use crate::elliptic::LatticeInvariants;
use crate::error::{Error, Result};
use crate::model::{build_operator, energy_offset, CouplingFamily};
use crate::scalar::Scalar;

use super::eigenvalues;

/// Halvings allowed per base step before continuation gives up.
const MAX_REFINE_DEPTH: u32 = 24;

/// Brute-force matching up to this many eigenvalues, greedy beyond.
const BRUTE_FORCE_MAX: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum G2Path {
    /// `center + radius·e^{2πi·turns·t}`.
    Circle { center: Complex64, radius: f64, turns: u32 },
    Segment { from: Complex64, to: Complex64 },
    /// Piecewise linear, uniform in the vertex index; closed when the last
    /// vertex equals the first.
    Polyline(Vec<Complex64>),
}

impl G2Path {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        G2Path::Circle { center, radius, turns: 1 }
    }

    /// The point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            G2Path::Circle { center, radius, turns } => {
                if t >= 1.0 {
                    // land exactly on the start so the loop closes
                    return center + Complex64::new(*radius, 0.0);
                }
                center + Complex64::from_polar(*radius, std::f64::consts::TAU * *turns as f64 * t)
            }
            G2Path::Segment { from, to } => from + (to - from) * t,
            G2Path::Polyline(v) => {
                if v.len() < 2 || t <= 0.0 {
                    return v[0];
                }
                if t >= 1.0 {
                    return v[v.len() - 1];
                }
                let s = t * (v.len() - 1) as f64;
                let i = s.floor() as usize;
                v[i] + (v[i + 1] - v[i]) * (s - i as f64)
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            G2Path::Circle { turns, .. } => *turns > 0,
            G2Path::Segment { .. } => false,
            G2Path::Polyline(v) => v.len() > 2 && v.first() == v.last(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SheetTrace {
    /// Accepted points, including refinement points.
    pub g2: Vec<Complex64>,
    /// Energies per accepted point, in branch order.
    pub branches: Vec<Vec<Complex64>>,
    /// For closed paths: branch `b` ends on the sheet where branch
    /// `permutation[b]` started.
    pub permutation: Option<Vec<usize>>,
    /// Number of step halvings that were needed.
    pub refinements: usize,
}

impl SheetTrace {
    pub fn cycle_notation(&self) -> Option<String> {
        self.permutation.as_deref().map(cycle_notation)
    }
}

/// 1-based cycle notation without fixed points; `()` for the identity.
pub fn cycle_notation(perm: &[usize]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    for start in 0..perm.len() {
        if seen[start] || perm[start] == start {
            seen[start] = true;
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push((i + 1).to_string());
            i = perm[i];
        }
        out.push_str(&format!("({})", cycle.join(" ")));
    }
    if out.is_empty() {
        "()".to_string()
    } else {
        out
    }
}

struct State {
    roots: [Complex64; 3],
    energies: Vec<Complex64>,
}

fn state_at(fam: &CouplingFamily<Complex64>, n: usize, g2: Complex64, g3: Complex64, prev: Option<&[Complex64; 3]>) -> Result<State> {
    let mut inv = LatticeInvariants::from_invariants(g2, g3);
    if let Some(prev) = prev {
        let perm = best_assignment(prev, &inv.roots);
        inv.roots = [inv.roots[perm[0]], inv.roots[perm[1]], inv.roots[perm[2]]];
    }
    let op = build_operator(fam, &inv)?;
    let sm = op.matrix_on(PolySpace::new(n));
    if !sm.preserves() {
        return Err(Error::Leakage { n, leakage: sm.leakage.norm() });
    }
    let offset = energy_offset(fam, &inv)?;
    let energies = eigenvalues(&sm.matrix).into_iter().map(|l| offset - l * 0.5).collect();
    Ok(State { roots: inv.roots, energies })
}

/// `perm` minimizing `Σ |new[perm[i]] − old[i]|`.
fn best_assignment(old: &[Complex64], new: &[Complex64]) -> Vec<usize> {
    let n = old.len();
    if n <= BRUTE_FORCE_MAX {
        (0..n)
            .permutations(n)
            .min_by(|a, b| cost(old, new, a).total_cmp(&cost(old, new, b)))
            .unwrap_or_default()
    } else {
        let mut free: Vec<usize> = (0..n).collect();
        (0..n)
            .map(|i| {
                let (pos, _) = free
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (new[*a.1] - old[i]).norm().total_cmp(&(new[*b.1] - old[i]).norm()))
                    .expect("as many new values as old");
                free.remove(pos)
            })
            .collect()
    }
}

fn cost(old: &[Complex64], new: &[Complex64], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| (new[j] - old[i]).norm()).sum()
}

/// Reorders `new` to follow `old`, or `None` if some value moves by half its
/// gap to the nearest neighbour or more.
fn match_step(old: &[Complex64], new: &[Complex64]) -> Option<Vec<Complex64>> {
    let perm = best_assignment(old, new);
    let matched: Vec<Complex64> = perm.iter().map(|&j| new[j]).collect();
    let gap = |set: &[Complex64], i: usize| {
        set.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| (v - set[i]).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let ok = (0..old.len()).all(|i| {
        let moved = (matched[i] - old[i]).norm();
        moved < 0.5 * gap(old, i).min(gap(&matched, i))
    });
    ok.then_some(matched)
}

/// Continues the energies of `fam` along `path` with `steps` base steps.
pub fn trace_branches<S: Scalar>(fam: &CouplingFamily<S>, path: &G2Path, g3: Complex64, steps: usize) -> Result<SheetTrace> {
    let n = fam.require_integer_n()?;
    if steps == 0 {
        return Err(Error::Config("a trace needs at least one step".into()));
    }
    let fam = fam.to_complex();
    let start = state_at(&fam, n, path.point(0.0), g3, None)?;
    let mut trace = SheetTrace {
        g2: vec![path.point(0.0)],
        branches: vec![start.energies.clone()],
        permutation: None,
        refinements: 0,
    };
    let mut current = start;
    let mut stack: Vec<(f64, u32)> = Vec::new();
    let mut t = 0.0;
    for step in 1..=steps {
        stack.push((step as f64 / steps as f64, 0));
        while let Some(&(target, depth)) = stack.last() {
            let g2 = path.point(target);
            let next = state_at(&fam, n, g2, g3, Some(&current.roots))?;
            let roots_ok = match_step(&current.roots, &next.roots).is_some()
                || current.roots.iter().zip(&next.roots).all(|(a, b)| a == b);
            match match_step(&current.energies, &next.energies).filter(|_| roots_ok) {
                Some(energies) => {
                    stack.pop();
                    t = target;
                    trace.g2.push(g2);
                    trace.branches.push(energies.clone());
                    current = State { roots: next.roots, energies };
                }
                None => {
                    if depth >= MAX_REFINE_DEPTH {
                        return Err(Error::Continuation {
                            step,
                            reason: format!("eigenvalues at g2 = {g2} cannot be matched; the path passes too close to a branch point"),
                        });
                    }
                    trace.refinements += 1;
                    stack.push(((t + target) / 2.0, depth + 1));
                }
            }
        }
    }
    if path.is_closed() {
        let first = &trace.branches[0];
        let last = trace.branches.last().expect("trace has a start point");
        let scale = first.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let perm = best_assignment(first, last);
        let mut inverse = vec![0; perm.len()];
        for (i, &j) in perm.iter().enumerate() {
            if (last[j] - first[i]).norm() > 1e-6 * scale {
                return Err(Error::Continuation {
                    step: steps,
                    reason: "loop did not return to the starting eigenvalue set".into(),
                });
            }
            inverse[j] = i;
        }
        trace.permutation = Some(inverse);
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoint {
    pub g2: Complex64,
    /// Half-width of the box known to contain the point.
    pub radius: f64,
    /// Monodromy around the box, or `None` if the box edge came too close to
    /// the point to be continued.
    pub monodromy: Option<String>,
}

/// Branch points inside the square `center ± half_width` (in both real and
/// imaginary directions), located by recursive subdivision of boxes with
/// non-trivial monodromy. Boxes whose monodromies cancel are missed.
pub fn locate_branch_points<S: Scalar>(
    fam: &CouplingFamily<S>,
    g3: Complex64,
    center: Complex64,
    half_width: f64,
    depth: u32,
    steps_per_side: usize,
) -> Result<Vec<BranchPoint>> {
    fam.require_integer_n()?;
    let mut found: Vec<BranchPoint> = Vec::new();
    let mut boxes = vec![(center, half_width, 0u32)];
    while let Some((c, h, d)) = boxes.pop() {
        let corners = [
            c + Complex64::new(h, -h),
            c + Complex64::new(h, h),
            c + Complex64::new(-h, h),
            c + Complex64::new(-h, -h),
            c + Complex64::new(h, -h),
        ];
        let monodromy = match trace_branches(fam, &G2Path::Polyline(corners.to_vec()), g3, 4 * steps_per_side) {
            Ok(t) => match t.cycle_notation() {
                Some(p) if p != "()" => Some(Some(p)),
                _ => None,
            },
            Err(Error::Continuation { .. }) => Some(None),
            Err(e) => return Err(e),
        };
        let Some(monodromy) = monodromy else { continue };
        if d == depth {
            if !found.iter().any(|b| (b.g2 - c).norm() <= 2.5 * h) {
                found.push(BranchPoint { g2: c, radius: h, monodromy });
            }
            continue;
        }
        let q = h / 2.0;
        for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
            boxes.push((c + Complex64::new(dx, dy), q, d + 1));
        }
    }
    found.sort_by(|a, b| super::cmp_complex(a.g2, b.g2));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cycle_strings() {
        assert_eq!(cycle_notation(&[0, 1, 2]), "()");
        assert_eq!(cycle_notation(&[1, 0]), "(1 2)");
        assert_eq!(cycle_notation(&[1, 2, 0, 3]), "(1 2 3)");
    }

    #[test]
    fn path_endpoints() {
        let p = G2Path::circle(c(0.5, 0.0), 2.0);
        assert_eq!(p.point(0.0), p.point(1.0));
        assert!(p.is_closed());
        let s = G2Path::Segment { from: c(1.0, 0.0), to: c(4.0, 0.0) };
        assert!(!s.is_closed());
        assert_eq!(s.point(0.5), c(2.5, 0.0));
        let poly = G2Path::Polyline(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)]);
        assert!(poly.is_closed());
        assert_eq!(poly.point(0.5), c(1.0, 0.5));
    }

    #[test]
    fn square_root_monodromy() {
        let fam = CouplingFamily::first(c(0.25, 0.0), c(1.0, 0.0));
        let around = trace_branches(&fam, &G2Path::circle(c(0.0, 0.0), 1.0), c(0.3, 0.0), 64).unwrap();
        assert_eq!(around.cycle_notation().as_deref(), Some("(1 2)"));
        let away = trace_branches(&fam, &G2Path::circle(c(3.0, 0.0), 1.0), c(0.3, 0.0), 64).unwrap();
        assert_eq!(away.cycle_notation().as_deref(), Some("()"));
    }

    #[test]
    fn branch_point_of_first_family_at_origin() {
        let fam = CouplingFamily::first(c(0.25, 0.0), c(1.0, 0.0));
        let found = locate_branch_points(&fam, c(0.3, 0.0), c(0.1, 0.07), 1.0, 6, 8).unwrap();
        assert_eq!(found.len(), 1);
        assert!(found[0].g2.norm() <= 2.0 * found[0].radius);
    }
}
