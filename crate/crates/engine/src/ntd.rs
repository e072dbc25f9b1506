//! Per-mode Neumann-to-Dirichlet maps of `−Δ − λ` inside and outside the
//! interface, and the combinations `M̃ = (M₊⁻¹ + M₋⁻¹)⁻¹`, `M̂ = M₊ + M₋`.
//!
//! On an angular mode every map is a scalar function of `λ`. With
//! `x = κR`, `κ = √(−λ)` and `z = x·f′(x)/f(x)` the logarithmic derivative of
//! the regular (interior) or decaying (exterior) radial solution,
//!
//! ```text
//! M₋ = R / z_reg,   M₊ = −R / z_dec,   M̃ = R / (z_reg − z_dec).
//! ```
//!
//! The exterior Neumann trace uses the normal pointing into the ball, hence
//! the sign in `M₊`. Jets in `λ` are generated from the Riccati equation for
//! `z` in the variable `u = x² = −R²λ`, which stays well conditioned for
//! large mode indices.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use singtrace_core::summation::least_squares_line;
use singtrace_core::{Error, Geometry, Jet, ModeSpec, Result};

use crate::specfun::{
    bessel_pair_jet, riccati_series, sph_bessel_pair_jet, BesselKind, RatioTable,
};

/// The four boundary functions of one mode at a common base point and order.
#[derive(Clone, Copy, Debug)]
pub struct NtdModeValue {
    pub m_minus: Jet,
    pub m_plus: Jet,
    pub m_tilde: Jet,
    pub m_hat: Jet,
}

/// How `M̃` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MTildeRoute {
    /// Harmonic sum of the two NtD jets (Riccati-generated). Accurate for
    /// every mode index.
    #[default]
    HarmonicSum,
    /// Wronskian closed form `R·Iₙ(κR)·Kₙ(κR)` (d = 2) or `κR²·i_l(κR)·k_l(κR)`
    /// (d = 3), with jets from the Bessel ODE. Loses accuracy in higher
    /// coefficients as the mode index grows.
    ClosedForm,
}

fn check_lambda(lambda0: f64) -> Result<()> {
    if !(lambda0 < 0.0) || !lambda0.is_finite() {
        return Err(Error::Domain(format!(
            "NtD maps are evaluated for negative real λ only, got {lambda0}"
        )));
    }
    Ok(())
}

/// Evaluates the boundary functions of all modes `0..=n_max` at one
/// spectral point, sharing a single Bessel ratio table.
#[derive(Clone, Debug)]
pub struct NtdEvaluator {
    geom: Geometry,
    lambda0: f64,
    order: usize,
    table: RatioTable,
}

impl NtdEvaluator {
    pub fn new(geom: &Geometry, lambda0: f64, order: usize, n_max: usize) -> Result<Self> {
        check_lambda(lambda0)?;
        if order > singtrace_core::MAX_ORDER {
            return Err(Error::Usage(format!(
                "jet order {order} exceeds the supported maximum {}",
                singtrace_core::MAX_ORDER
            )));
        }
        let x = (-lambda0).sqrt() * geom.radius();
        let table = RatioTable::new(BesselKind::for_dim(geom.dim()), n_max, x)?;
        Ok(NtdEvaluator {
            geom: *geom,
            lambda0,
            order,
            table,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_max(&self) -> usize {
        self.table.n_max()
    }

    pub fn ratio_table(&self) -> &RatioTable {
        &self.table
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::Usage(format!(
                "mode {n} lies beyond the evaluator range 0..={}",
                self.n_max()
            )));
        }
        Ok(())
    }

    /// Jet of `x·f′/f = root + w` in `λ` from the value of `w`.
    fn log_derivative_jet(&self, w0: f64, root: f64) -> Result<Jet> {
        let kind = self.table.kind;
        let beta = 2.0 * root + kind.first_order_coeff() - 1.0;
        let x = self.table.x;
        let c = riccati_series(beta, x * x, w0, self.order)?;
        let r2 = self.geom.radius() * self.geom.radius();
        let mut scale = 1.0;
        let mut coeffs = Vec::with_capacity(self.order + 1);
        for (j, cj) in c.into_iter().enumerate() {
            coeffs.push(if j == 0 { cj + root } else { cj * scale });
            scale *= -r2;
        }
        Jet::from_coeffs(self.lambda0, &coeffs)
    }

    /// `(z_reg, z_dec)` jets of mode `n`.
    pub fn log_derivatives(&self, n: usize) -> Result<(Jet, Jet)> {
        self.check_mode(n)?;
        let (reg_root, dec_root) = self.table.kind.indicial_roots(n);
        let z_reg = self.log_derivative_jet(self.table.w_regular(n), reg_root)?;
        let z_dec = self.log_derivative_jet(self.table.w_decaying(n), dec_root)?;
        Ok((z_reg, z_dec))
    }

    pub fn mode_value(&self, n: usize) -> Result<NtdModeValue> {
        let (z_reg, z_dec) = self.log_derivatives(n)?;
        let radius = self.geom.radius();
        let r = Jet::constant(radius, self.lambda0, self.order)?;
        let m_minus = r.try_div(&z_reg).map_err(|e| e.in_mode(n))?;
        let m_plus = (-r).try_div(&z_dec).map_err(|e| e.in_mode(n))?;
        let m_tilde = r.try_div(&(z_reg - z_dec)).map_err(|e| e.in_mode(n))?;
        Ok(NtdModeValue {
            m_minus,
            m_plus,
            m_tilde,
            m_hat: m_minus + m_plus,
        })
    }
}

fn single_mode(
    mode: &ModeSpec,
    geom: &Geometry,
    lambda0: f64,
    order: usize,
) -> Result<NtdModeValue> {
    NtdEvaluator::new(geom, lambda0, order, mode.index)?.mode_value(mode.index)
}

/// Interior map `M₋` of one mode as a jet at `λ₀`.
pub fn ntd_interior(mode: &ModeSpec, geom: &Geometry, lambda0: f64, order: usize) -> Result<Jet> {
    Ok(single_mode(mode, geom, lambda0, order)?.m_minus)
}

/// Exterior map `M₊` of one mode as a jet at `λ₀`.
pub fn ntd_exterior(mode: &ModeSpec, geom: &Geometry, lambda0: f64, order: usize) -> Result<Jet> {
    Ok(single_mode(mode, geom, lambda0, order)?.m_plus)
}

/// `M̃` of one mode, by the requested route.
pub fn m_tilde(
    mode: &ModeSpec,
    geom: &Geometry,
    lambda0: f64,
    order: usize,
    route: MTildeRoute,
) -> Result<Jet> {
    match route {
        MTildeRoute::HarmonicSum => Ok(single_mode(mode, geom, lambda0, order)?.m_tilde),
        MTildeRoute::ClosedForm => {
            check_lambda(lambda0)?;
            let radius = geom.radius();
            let kappa = Jet::kappa(lambda0, order)?;
            let x = kappa.scale(radius);
            match BesselKind::for_dim(geom.dim()) {
                BesselKind::Cylindrical => {
                    let j = bessel_pair_jet(mode.index, &x)?;
                    Ok((j.i * j.k).scale(radius))
                }
                BesselKind::Spherical => {
                    let j = sph_bessel_pair_jet(mode.index, &x)?;
                    Ok(kappa * j.i * j.k * (radius * radius))
                }
            }
        }
    }
}

/// `M̂ = M₊ + M₋` of one mode.
pub fn m_hat(mode: &ModeSpec, geom: &Geometry, lambda0: f64, order: usize) -> Result<Jet> {
    Ok(single_mode(mode, geom, lambda0, order)?.m_hat)
}

/// Boundary function probed by [`schatten_decay_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayTarget {
    MTilde,
    MHat,
}

impl FromStr for DecayTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m-tilde" => Ok(DecayTarget::MTilde),
            "m-hat" => Ok(DecayTarget::MHat),
            _ => Err(Error::Usage(format!(
                "unknown decay target '{s}' (expected m-tilde or m-hat)"
            ))),
        }
    }
}

/// Abscissa of the decay fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayAbscissa {
    /// One point per mode index.
    #[default]
    ModeIndex,
    /// Per-mode values repeated by multiplicity and sorted, so the abscissa
    /// is the rank of the singular value.
    SingularValueRank,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `p` in `|value| ≈ C·tᵖ`.
    pub exponent: f64,
    pub prefactor: f64,
    pub points: usize,
}

/// Least-squares slope of `log|coefficient k|` against the log of the mode
/// index (or singular-value rank) over modes `n_lo..=n_hi`.
///
/// The boundary operators are diagonal in the mode basis, so the per-mode
/// values are their eigenvalues and, sorted by magnitude, their singular
/// values.
pub fn schatten_decay_probe(
    which: DecayTarget,
    k: usize,
    geom: &Geometry,
    lambda0: f64,
    n_range: (usize, usize),
    abscissa: DecayAbscissa,
) -> Result<DecayFit> {
    let (n_lo, n_hi) = n_range;
    if n_lo < 10 || n_hi <= n_lo {
        return Err(Error::Usage(format!(
            "decay probe needs 10 ≤ n_lo < n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi - n_lo + 1 < 5 {
        return Err(Error::Usage("decay fit needs at least 5 modes".into()));
    }
    let eval = NtdEvaluator::new(geom, lambda0, k, n_hi)?;
    let value = |n: usize| -> Result<f64> {
        let v = eval.mode_value(n)?;
        let jet = match which {
            DecayTarget::MTilde => v.m_tilde,
            DecayTarget::MHat => v.m_hat,
        };
        Ok(jet.coeff(k).abs())
    };

    let (xs, ys): (Vec<f64>, Vec<f64>) = match abscissa {
        DecayAbscissa::ModeIndex => {
            let mut pts = Vec::with_capacity(n_hi - n_lo + 1);
            for n in n_lo..=n_hi {
                let v = value(n)?;
                if v > 0.0 {
                    pts.push(((n as f64).ln(), v.ln()));
                }
            }
            pts.into_iter().unzip()
        }
        DecayAbscissa::SingularValueRank => {
            let mut entries = Vec::new();
            for n in 0..=n_hi {
                let v = value(n)?;
                entries.push((v, n, geom.mode_weight(n)));
            }
            entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut pts = Vec::new();
            let mut rank = 0usize;
            for (v, n, w) in entries {
                for _ in 0..w {
                    rank += 1;
                    if n >= n_lo && v > 0.0 {
                        pts.push(((rank as f64).ln(), v.ln()));
                    }
                }
            }
            pts.into_iter().unzip()
        }
    };
    if xs.len() < 5 {
        return Err(Error::Usage(format!(
            "decay fit needs at least 5 nonzero points, got {}",
            xs.len()
        )));
    }
    let (slope, intercept) = least_squares_line(&xs, &ys)
        .ok_or_else(|| Error::Numeric("degenerate decay fit".into()))?;
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        points: xs.len(),
    })
}
