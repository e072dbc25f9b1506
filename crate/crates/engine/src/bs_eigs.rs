//! Discrete eigenvalues of the δ and δ′ operators from the per-mode
//! Birman-Schwinger conditions `1 = α·M̃ₙ(λ)` and `1 = ω·M̂ₙ(λ)`.
//!
//! `M̃ₙ`, `M̂ₙ` are increasing in `λ` below the spectrum, so
//! `g(λ) = 1 − s·Mₙ(λ)` is monotone and has at most one root per mode.

use serde::{Deserialize, Serialize};
use singtrace_core::{CouplingModel, Error, Geometry, ModeSpec, Result, MODE_CEILING};

use crate::ntd::NtdEvaluator;

/// Closest approach to the threshold `λ = 0`.
pub const UPPER_EDGE: f64 = -1e-8;

/// Target residual `|g|` at a reported root.
pub const RESIDUAL_TOL: f64 = 1e-12;

const SCAN_POINTS: usize = 48;
const MAX_POLISH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub mode: ModeSpec,
    pub lambda: f64,
    pub multiplicity: usize,
    /// `1 − s·M(λ)` at the reported root.
    pub residual: f64,
}

/// `[−max(10, s²)/R², −10⁻⁸]`.
pub fn default_bracket(geom: &Geometry, strength: f64) -> (f64, f64) {
    let r = geom.radius();
    (-(10f64.max(strength * strength)) / (r * r), UPPER_EDGE)
}

/// The Birman-Schwinger function `g(λ) = 1 − s·M(λ)` of one mode.
pub fn bs_function(
    model: CouplingModel,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    lambda: f64,
) -> Result<f64> {
    let v = NtdEvaluator::new(geom, lambda, 0, mode.index)?.mode_value(mode.index)?;
    let m = match model {
        CouplingModel::Delta => v.m_tilde.value(),
        CouplingModel::DeltaPrime => v.m_hat.value(),
    };
    Ok(1.0 - strength * m)
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    let (a, b) = bracket;
    if !(a < b && b < 0.0) || !a.is_finite() {
        return Err(Error::Usage(format!(
            "eigenvalue bracket must satisfy a < b < 0, got [{a}, {b}]"
        )));
    }
    Ok(())
}

/// All roots of `g` for one mode inside `bracket` (zero or one).
pub fn bs_root_find(
    model: CouplingModel,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    bracket: (f64, f64),
) -> Result<Vec<EigResult>> {
    if strength == 0.0 || !strength.is_finite() {
        return Err(Error::Usage(format!(
            "Birman-Schwinger search needs a finite nonzero strength, got {strength}"
        )));
    }
    check_bracket(bracket)?;
    let g = |lambda: f64| bs_function(model, mode, geom, strength, lambda);

    // Log-spaced scan in −λ: the bracket usually spans many decades.
    let (a, b) = bracket;
    let (la, lb) = ((-a).ln(), (-b).ln());
    let mut grid = Vec::with_capacity(SCAN_POINTS);
    for i in 0..SCAN_POINTS {
        let t = i as f64 / (SCAN_POINTS - 1) as f64;
        let lambda = if i == 0 {
            a
        } else if i == SCAN_POINTS - 1 {
            b
        } else {
            -(la + t * (lb - la)).exp()
        };
        grid.push((lambda, g(lambda)?));
    }
    if grid[0].1 == 0.0 || grid[SCAN_POINTS - 1].1 == 0.0 {
        return Err(Error::Usage("a bracket endpoint is itself a root".into()));
    }
    // Monotone in λ with the sign of −strength.
    let direction = -strength.signum();
    if grid
        .windows(2)
        .any(|w| direction * (w[1].1 - w[0].1) < -1e-12 * (w[0].1.abs() + w[1].1.abs()))
    {
        return Err(Error::Numeric(format!(
            "Birman-Schwinger function is not monotone in mode {}",
            mode.index
        )));
    }
    let crossings: Vec<usize> = (0..SCAN_POINTS - 1)
        .filter(|&i| grid[i].1.signum() != grid[i + 1].1.signum())
        .collect();
    if crossings.len() > 1 {
        return Err(Error::Numeric(format!(
            "more than one Birman-Schwinger root in mode {}",
            mode.index
        )));
    }
    let Some(&i) = crossings.first() else {
        return Ok(Vec::new());
    };

    // Illinois-modified regula falsi, with bisection as a safeguard.
    let (mut x0, mut g0) = grid[i];
    let (mut x1, mut g1) = grid[i + 1];
    let (mut best, mut best_g) = if g0.abs() < g1.abs() {
        (x0, g0)
    } else {
        (x1, g1)
    };
    let mut side = 0i8;
    for _ in 0..MAX_POLISH {
        if best_g.abs() <= RESIDUAL_TOL {
            break;
        }
        let mut x = (x0 * g1 - x1 * g0) / (g1 - g0);
        if !(x > x0.min(x1) && x < x0.max(x1)) {
            x = 0.5 * (x0 + x1);
        }
        if x == x0 || x == x1 {
            break;
        }
        let gx = g(x)?;
        if gx.abs() < best_g.abs() {
            best = x;
            best_g = gx;
        }
        if gx.signum() == g1.signum() {
            x1 = x;
            g1 = gx;
            if side == -1 {
                g0 *= 0.5;
            }
            side = -1;
        } else {
            x0 = x;
            g0 = gx;
            if side == 1 {
                g1 *= 0.5;
            }
            side = 1;
        }
    }
    Ok(vec![EigResult {
        mode: *mode,
        lambda: best,
        multiplicity: mode.weight,
        residual: best_g,
    }])
}

/// Roots over a set of modes, in ascending mode order. `bracket = None`
/// uses [`default_bracket`].
pub fn bs_eigs(
    model: CouplingModel,
    geom: &Geometry,
    strength: f64,
    modes: impl IntoIterator<Item = usize>,
    bracket: Option<(f64, f64)>,
) -> Result<Vec<EigResult>> {
    let bracket = bracket.unwrap_or_else(|| default_bracket(geom, strength));
    let mut out = Vec::new();
    for n in modes {
        out.extend(bs_root_find(model, &geom.mode(n), geom, strength, bracket)?);
    }
    Ok(out)
}

/// Highest mode index carrying a bound state, judged at the upper bracket
/// edge; `None` when there is none.
///
/// `Mₙ(λ)` decreases in `n`, so the first mode with `g(λ) > 0` near the
/// threshold ends the search.
pub fn bound_state_cutoff(
    model: CouplingModel,
    geom: &Geometry,
    strength: f64,
) -> Result<Option<usize>> {
    if strength <= 0.0 {
        return Ok(None);
    }
    let eval = NtdEvaluator::new(geom, UPPER_EDGE, 0, MODE_CEILING)?;
    for n in 0..=MODE_CEILING {
        let v = eval.mode_value(n)?;
        let m = match model {
            CouplingModel::Delta => v.m_tilde.value(),
            CouplingModel::DeltaPrime => v.m_hat.value(),
        };
        if 1.0 - strength * m > 0.0 {
            return Ok(n.checked_sub(1));
        }
    }
    Ok(Some(MODE_CEILING))
}
