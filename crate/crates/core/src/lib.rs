//! Shared building blocks for evaluating trace formulae of Schrödinger
//! operators with δ- and δ′-interactions on a circle or sphere: jets in the
//! spectral parameter, angular-mode bookkeeping, evaluation plans and
//! compensated summation.

// Negated comparisons are deliberate: NaN must fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod jets;
pub mod summation;

pub use error::{Error, Result};
pub use geometry::{
    enumerate_modes, validate_plan, Coupling, CouplingModel, Dimension, EnginePlan, FormulaId,
    Geometry, ModeCap, ModeSpec, SpectralGuard, MODE_CEILING,
};
pub use jets::{jet_arith, ArithOp, Jet, MAX_ORDER};
pub use summation::{compensated_sum, CompensatedSum, PowerLawFit};
