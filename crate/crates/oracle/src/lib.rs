//! Finite-volume oracle for resolvent-power traces of the δ, δ′, Neumann and
//! free operators on a circle or sphere.
//!
//! Each angular mode is discretized directly from the interface conditions,
//! with no reference to Neumann-to-Dirichlet maps, Krein formulae or Bessel
//! functions, so that agreement with the boundary-calculus engine is an
//! independent check.
//!
//! The continuum trace lives on `L²(ℝᵈ)`; the oracle replaces it by a
//! trace on a large ball with a Dirichlet wall. Convergence in the ball
//! size is observed empirically, not proved.

// Negated comparisons are deliberate: NaN must fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod radial;
pub mod trace;

pub use radial::{
    build_radial, build_radial_on, OracleConfig, Pairing, RadialModel, RadialOperator, TraceRoute,
};
pub use trace::{oracle_eigenvalues, oracle_mode_term, oracle_trace, thread_count, OracleResult};
