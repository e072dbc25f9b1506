//! Interface geometry, angular modes, couplings and evaluation plans.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::MAX_ORDER;

/// Hard ceiling on the number of angular modes any mode sum may visit.
pub const MODE_CEILING: usize = 10_000;

/// Admissible interface radii.
pub const RADIUS_RANGE: (f64, f64) = (1e-3, 1e3);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    /// Circle in the plane.
    #[serde(rename = "2")]
    Two,
    /// Sphere in space.
    #[serde(rename = "3")]
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::Domain(format!(
                "only d = 2 (circle) and d = 3 (sphere) are supported, got d = {d}"
            ))),
        }
    }
}

/// The interface Σ: a circle (d = 2) or sphere (d = 3) of the given radius,
/// splitting space into the ball Ω₋ and its exterior Ω₊.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    dim: Dimension,
    radius: f64,
}

impl Geometry {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        let dim = Dimension::from_usize(dim)?;
        if !(radius >= RADIUS_RANGE.0 && radius <= RADIUS_RANGE.1) {
            return Err(Error::Domain(format!(
                "radius must lie in [{}, {}], got {radius}",
                RADIUS_RANGE.0, RADIUS_RANGE.1
            )));
        }
        Ok(Geometry { dim, radius })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Geometry::new(2, radius)
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Geometry::new(3, radius)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim.as_usize()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Multiplicity of the angular eigenspace with the given index.
    pub fn mode_weight(&self, index: usize) -> usize {
        match self.dim {
            Dimension::Two => {
                if index == 0 {
                    1
                } else {
                    2
                }
            }
            Dimension::Three => 2 * index + 1,
        }
    }

    pub fn mode(&self, index: usize) -> ModeSpec {
        ModeSpec {
            index,
            weight: self.mode_weight(index),
        }
    }

    /// Eigenvalue of the angular Laplacian on the unit circle/sphere:
    /// `n²` for d = 2 and `l(l+1)` for d = 3.
    pub fn angular_eigenvalue(&self, index: usize) -> f64 {
        let n = index as f64;
        match self.dim {
            Dimension::Two => n * n,
            Dimension::Three => n * (n + 1.0),
        }
    }
}

/// Angular mode index (n on the circle, l on the sphere) with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    pub index: usize,
    pub weight: usize,
}

/// Modes `0..=cap` in ascending order.
pub fn enumerate_modes(geom: &Geometry, cap: usize) -> Vec<ModeSpec> {
    (0..=cap).map(|i| geom.mode(i)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingModel {
    Delta,
    DeltaPrime,
}

impl fmt::Display for CouplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingModel::Delta => "delta",
            CouplingModel::DeltaPrime => "delta-prime",
        })
    }
}

impl FromStr for CouplingModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(CouplingModel::Delta),
            "delta-prime" | "deltaprime" => Ok(CouplingModel::DeltaPrime),
            _ => Err(Error::Usage(format!(
                "unknown coupling model '{s}' (expected delta or delta-prime)"
            ))),
        }
    }
}

/// Constant interaction strength on Σ: α for δ, ω for δ′ (units 1/length).
/// Positive values are attractive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub model: CouplingModel,
    pub strength: f64,
}

impl Coupling {
    pub fn new(model: CouplingModel, strength: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(Error::Domain(format!(
                "coupling strength must be finite, got {strength}"
            )));
        }
        Ok(Coupling { model, strength })
    }

    pub fn delta(alpha: f64) -> Result<Self> {
        Coupling::new(CouplingModel::Delta, alpha)
    }

    pub fn delta_prime(omega: f64) -> Result<Self> {
        Coupling::new(CouplingModel::DeltaPrime, omega)
    }
}

/// The four trace identities the engine evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaId {
    /// `(H_α − λ)^−m − (H_free − λ)^−m`.
    DeltaVsFree,
    /// `(K_ω − λ)^−m − (K_N − λ)^−m`.
    #[serde(rename = "deltaprime-vs-neumann")]
    DeltaPrimeVsNeumann,
    /// `(K_ω − λ)^−m − (H_free − λ)^−m`.
    #[serde(rename = "deltaprime-vs-free")]
    DeltaPrimeVsFree,
    /// `(K_N − λ)^−m − (H_free − λ)^−m`.
    NeumannVsFree,
}

impl FormulaId {
    pub const ALL: [FormulaId; 4] = [
        FormulaId::DeltaVsFree,
        FormulaId::DeltaPrimeVsNeumann,
        FormulaId::DeltaPrimeVsFree,
        FormulaId::NeumannVsFree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaId::DeltaVsFree => "delta-vs-free",
            FormulaId::DeltaPrimeVsNeumann => "deltaprime-vs-neumann",
            FormulaId::DeltaPrimeVsFree => "deltaprime-vs-free",
            FormulaId::NeumannVsFree => "neumann-vs-free",
        }
    }

    /// Coupling model the formula needs, if any.
    pub fn coupling_model(self) -> Option<CouplingModel> {
        match self {
            FormulaId::DeltaVsFree => Some(CouplingModel::Delta),
            FormulaId::DeltaPrimeVsNeumann | FormulaId::DeltaPrimeVsFree => {
                Some(CouplingModel::DeltaPrime)
            }
            FormulaId::NeumannVsFree => None,
        }
    }

    /// Lower bound on `m` for the resolvent power difference to be trace
    /// class: `(d−2)/2` when both operators share the interface regularity,
    /// `(d−1)/2` when one side is decoupled across Σ and the other is not.
    pub fn threshold(self, dim: usize) -> (f64, &'static str) {
        let d = dim as f64;
        match self {
            FormulaId::DeltaVsFree | FormulaId::DeltaPrimeVsNeumann => ((d - 2.0) / 2.0, "(d−2)/2"),
            FormulaId::DeltaPrimeVsFree | FormulaId::NeumannVsFree => ((d - 1.0) / 2.0, "(d−1)/2"),
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown formula '{s}' (expected one of delta-vs-free, deltaprime-vs-neumann, \
                     deltaprime-vs-free, neumann-vs-free)"
                ))
            })
    }
}

/// How far the adaptive mode sum may run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCap {
    /// Adaptive growth up to [`MODE_CEILING`].
    Auto,
    /// Adaptive growth up to the given cap.
    Fixed(usize),
    /// Sum exactly the modes `0..=n`, without early stopping.
    Exact(usize),
}

impl ModeCap {
    pub fn ceiling(self) -> usize {
        match self {
            ModeCap::Auto => MODE_CEILING,
            ModeCap::Fixed(n) | ModeCap::Exact(n) => n.min(MODE_CEILING),
        }
    }
}

/// Where on the real axis the spectral parameter may sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralGuard {
    /// Strictly below the lowest eigenvalue: every Birman-Schwinger
    /// denominator `1 − s·M` must be positive.
    BelowSpectrum,
    /// Anywhere in the resolvent set: denominators only need to be nonzero.
    ResolventSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnginePlan {
    /// Resolvent power.
    pub m: usize,
    /// Spectral parameter (negative real).
    pub lambda0: f64,
    pub mode_cap: ModeCap,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub guard: SpectralGuard,
}

impl EnginePlan {
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_REL_TOL: f64 = 1e-6;

    pub fn new(m: usize, lambda0: f64) -> Self {
        EnginePlan {
            m,
            lambda0,
            mode_cap: ModeCap::Auto,
            abs_tol: Self::DEFAULT_ABS_TOL,
            rel_tol: Self::DEFAULT_REL_TOL,
            guard: SpectralGuard::BelowSpectrum,
        }
    }

    pub fn with_mode_cap(mut self, cap: ModeCap) -> Self {
        self.mode_cap = cap;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_guard(mut self, guard: SpectralGuard) -> Self {
        self.guard = guard;
        self
    }

    /// Jets are carried to order `m`: the `(m−1)`-th coefficient of a product
    /// involving a first derivative needs one extra order.
    pub fn jet_order(&self) -> usize {
        self.m
    }
}

/// Check the plan against the trace-class hypothesis of the requested
/// formula and against the numeric limits of the engine.
pub fn validate_plan(plan: &EnginePlan, geom: &Geometry, which: FormulaId) -> Result<()> {
    if plan.m == 0 {
        return Err(Error::Plan(
            "the resolvent power m must be at least 1".into(),
        ));
    }
    if plan.m > MAX_ORDER {
        return Err(Error::Plan(format!(
            "m = {} exceeds the supported maximum {MAX_ORDER}",
            plan.m
        )));
    }
    if !(plan.lambda0 < 0.0) || !plan.lambda0.is_finite() {
        return Err(Error::Domain(format!(
            "the spectral parameter must be negative real, got {}",
            plan.lambda0
        )));
    }
    for (name, tol) in [("abs_tol", plan.abs_tol), ("rel_tol", plan.rel_tol)] {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::Usage(format!(
                "{name} must be finite and non-negative, got {tol}"
            )));
        }
    }
    if let ModeCap::Fixed(0) = plan.mode_cap {
        return Err(Error::Usage("mode cap must be at least 1".into()));
    }
    let d = geom.dim();
    let (threshold, label) = which.threshold(d);
    if (plan.m as f64) <= threshold {
        return Err(Error::Plan(format!(
            "{which} requires m > {label} = {threshold} (got m = {}, d = {d})",
            plan.m
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_examples() {
        let c = Geometry::circle(1.0).unwrap();
        let s = Geometry::sphere(1.0).unwrap();
        let pairs = |v: Vec<ModeSpec>| {
            v.into_iter()
                .map(|m| (m.index, m.weight))
                .collect::<Vec<_>>()
        };
        assert_eq!(pairs(enumerate_modes(&c, 2)), vec![(0, 1), (1, 2), (2, 2)]);
        assert_eq!(pairs(enumerate_modes(&s, 2)), vec![(0, 1), (1, 3), (2, 5)]);
        assert_eq!(pairs(enumerate_modes(&c, 0)), vec![(0, 1)]);
    }

    #[test]
    fn weight_sums_have_closed_forms() {
        let c = Geometry::circle(1.0).unwrap();
        let s = Geometry::sphere(1.0).unwrap();
        for cap in 0..=1000 {
            let wc: usize = enumerate_modes(&c, cap).iter().map(|m| m.weight).sum();
            let ws: usize = enumerate_modes(&s, cap).iter().map(|m| m.weight).sum();
            assert_eq!(wc, 2 * cap + 1);
            assert_eq!(ws, (cap + 1) * (cap + 1));
        }
    }

    #[test]
    fn geometry_sanity_window() {
        assert!(Geometry::new(4, 1.0).is_err());
        assert!(Geometry::new(2, 0.0).is_err());
        assert!(Geometry::new(2, 2e3).is_err());
        assert!(Geometry::new(3, 1e-3).is_ok());
    }

    #[test]
    fn plan_thresholds() {
        let s = Geometry::sphere(1.0).unwrap();
        let c = Geometry::circle(1.0).unwrap();
        let err =
            validate_plan(&EnginePlan::new(1, -1.0), &s, FormulaId::DeltaPrimeVsFree).unwrap_err();
        match err {
            Error::Plan(msg) => assert!(msg.contains("requires m > (d−1)/2 = 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(validate_plan(&EnginePlan::new(1, -1.0), &c, FormulaId::DeltaVsFree).is_ok());
        assert!(validate_plan(&EnginePlan::new(2, -1.0), &s, FormulaId::DeltaPrimeVsFree).is_ok());
        assert!(validate_plan(&EnginePlan::new(1, -1.0), &s, FormulaId::DeltaVsFree).is_ok());
        assert!(validate_plan(&EnginePlan::new(1, -1.0), &s, FormulaId::NeumannVsFree).is_err());
        assert!(matches!(
            validate_plan(&EnginePlan::new(1, 0.5), &c, FormulaId::DeltaVsFree),
            Err(Error::Domain(_))
        ));
        assert!(validate_plan(&EnginePlan::new(0, -1.0), &c, FormulaId::DeltaVsFree).is_err());
        assert!(validate_plan(&EnginePlan::new(9, -1.0), &c, FormulaId::DeltaVsFree).is_err());
    }

    #[test]
    fn formula_names_round_trip() {
        for f in FormulaId::ALL {
            assert_eq!(f.name().parse::<FormulaId>().unwrap(), f);
        }
        assert!("delta".parse::<FormulaId>().is_err());
    }
}
