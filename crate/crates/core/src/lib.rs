//! Lagrangians of r-uniform patterns and two computational views of the
//! gaps between r-graph Turán densities.
//!
//! * [`pattern`]: r-multisets, patterns, blow-ups and exact Lagrange
//!   polynomials.
//! * [`simplex`]: multi-start maximization of a Lagrange polynomial over the
//!   standard simplex, KKT residuals, and grid upper bounds.
//! * [`chain`]: the edge-by-edge chain of r-graphs on `[m]` whose Lagrangians
//!   never jump by more than `r!/r^r`.
//! * [`dominance`]: compositions under the dominance order, down-closed sets
//!   and the patterns they induce, plus the two-variable Muirhead/bunching
//!   verifiers.
//! * [`ladder`]: the exact density ladder of down-closed prefixes and its
//!   balls-in-urns interpretation.
//!
//! Numerical code is generic over the scalar type (see [`scalar`]); the
//! aliases below fix the common choices.

// `!(x >= 0.0)` style tests are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod combinat;
pub mod dominance;
pub mod error;
pub mod io;
pub mod ladder;
pub mod pattern;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use pattern::{BlowupSpec, LagrangePolynomial, Pattern, RMultiset};
pub use scalar::{Real, Scalar};
pub use simplex::{OptimizerConfig, StepRule};

/// Exact rational numbers (reduced, positive denominator).
pub type Rational = num_rational::BigRational;

pub type Point = simplex::SimplexPoint<f64>;
pub type Point32 = simplex::SimplexPoint<f32>;
pub type Optimum = simplex::OptResult<f64>;
pub type Optimum32 = simplex::OptResult<f32>;
pub type ChainLadder = chain::ChainLadder<f64>;
