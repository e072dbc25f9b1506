//! Boundary-calculus side of the trace identities: Bessel functions,
//! per-mode Neumann-to-Dirichlet maps as jets in the spectral parameter,
//! mode-sum trace evaluation and Birman-Schwinger eigenvalue search.

// Negated comparisons are deliberate: NaN must fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bs_eigs;
pub mod ntd;
pub mod specfun;
pub mod trace;
