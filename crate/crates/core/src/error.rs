use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse `{input}`: expected {expected}")]
    Parse { input: String, expected: String },

    #[error("lattice parameter tau_im must be positive and finite, got {0}")]
    InvalidLattice(f64),

    #[error("degenerate invariants (discriminant {0:e}): no genuine lattice")]
    DegenerateLattice(f64),

    #[error("lattice series did not converge to 1e-12 after {terms} terms (aspect ratio too extreme)")]
    SeriesNotConverged { terms: usize },

    #[error("point {x} lies within {distance:e} of a lattice pole")]
    PoleProximity { x: String, distance: f64 },

    #[error("operator order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("conjugated operator is not polynomial: remainder at root {0}")]
    NotPolynomial(String),

    #[error("root index must be 1, 2 or 3, got {0}")]
    InvalidRootIndex(usize),

    #[error("n = {0} is not a nonnegative integer: the sl(2) form of the operator exists for any n, but the finite-dimensional invariant subspace P_n (quasi-exact solvability) and its polynomial eigenfunctions need integer n >= 0")]
    NonIntegerN(String),

    #[error("operator does not preserve P_{n}: leakage norm {leakage:e}")]
    Leakage { n: usize, leakage: f64 },

    #[error("oracle evaluation failed at x = {x}: {reason}")]
    Oracle { x: f64, reason: String },

    #[error("branch continuation failed at step {step}: {reason}")]
    Continuation { step: usize, reason: String },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(input: &str, expected: &str) -> Self {
        Error::Parse {
            input: input.to_string(),
            expected: expected.to_string(),
        }
    }
}
