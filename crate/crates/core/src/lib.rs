//! BC1 elliptic quantum model: the three algebraic (τ-space) forms of
//! `H = −½∂ₓ² + κ₂℘(2x) + κ₃℘(x)`, their hidden sl(2) structure, polynomial
//! eigenfunctions, and an independent x-space check built on ℘.

pub mod cli;
pub mod diffop;
pub mod discrepancy;
pub mod elliptic;
pub mod error;
pub mod integral;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod sl2;
pub mod spectrum;

pub use error::{Error, Result};
