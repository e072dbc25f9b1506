//! Trace formulae as weighted mode sums of jet coefficients.
//!
//! Every boundary operator is diagonal in the angular mode basis, so each
//! trace is `Σₙ weight(n)·[f_n]_{m−1}`, where `f_n` is the per-mode scalar
//! function of the formula and `[·]_{m−1}` its Taylor coefficient of order
//! `m−1` at `λ₀`. That coefficient already carries the `1/(m−1)!` prefactor.

use serde::{Deserialize, Serialize};
use singtrace_core::summation::{CompensatedSum, PowerLawFit};
use singtrace_core::{
    validate_plan, Coupling, EnginePlan, Error, FormulaId, Geometry, Jet, ModeCap, ModeSpec,
    Result, SpectralGuard,
};

use crate::ntd::{NtdEvaluator, NtdModeValue};

/// Minimum number of modes summed before the stop rule may fire.
pub const MIN_MODES: usize = 12;

/// Consecutive small terms required by the stop rule.
pub const STOP_RUN: usize = 3;

/// Terms used by the power-law tail fit.
pub const TAIL_FIT_POINTS: usize = 10;

/// Smallest fitted decay exponent accepted for a tail bound.
pub const TAIL_MIN_EXPONENT: f64 = 1.5;

const FIRST_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub index: usize,
    pub weight: usize,
    /// Unweighted per-mode contribution.
    pub term: f64,
}

impl ModeTerm {
    pub fn weighted(&self) -> f64 {
        self.weight as f64 * self.term
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    /// Compensated partial sum over the modes used.
    pub value: f64,
    pub modes_used: usize,
    /// Estimated magnitude of the neglected modes.
    pub tail_bound: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_mode: Option<Vec<ModeTerm>>,
}

/// Coupling strength a formula needs, checked against the coupling model.
/// `neumann-vs-free` involves no coupling and ignores the argument.
pub fn coupling_strength(which: FormulaId, coupling: Option<&Coupling>) -> Result<f64> {
    match which.coupling_model() {
        None => Ok(0.0),
        Some(model) => match coupling {
            Some(c) if c.model == model => Ok(c.strength),
            Some(c) => Err(Error::Usage(format!(
                "{which} needs a {model} coupling, got {}",
                c.model
            ))),
            None => Err(Error::Usage(format!(
                "{which} needs a {model} coupling strength"
            ))),
        },
    }
}

fn guard_denominator(den: &Jet, guard: SpectralGuard, lambda0: f64, mode: usize) -> Result<()> {
    if guard == SpectralGuard::BelowSpectrum && !(den.value() > 0.0) {
        return Err(Error::AboveSpectrum {
            lambda: lambda0,
            mode,
            denominator: den.value(),
        });
    }
    Ok(())
}

/// The per-mode function `f` of a formula as a jet of order `m − 1`.
pub fn mode_function(
    which: FormulaId,
    strength: f64,
    v: &NtdModeValue,
    guard: SpectralGuard,
    mode: usize,
) -> Result<Jet> {
    let order = v.m_tilde.order();
    if order == 0 {
        return Err(Error::Usage(
            "mode functions need jets of order at least 1".into(),
        ));
    }
    let lambda0 = v.m_tilde.base_point();
    let run = || -> Result<Jet> {
        match which {
            FormulaId::DeltaVsFree => {
                let m = v.m_tilde;
                let den = (-m.scale(strength)).offset(1.0).truncate(order - 1)?;
                guard_denominator(&den, guard, lambda0, mode)?;
                m.shift_derivative()?.scale(strength).try_div(&den)
            }
            FormulaId::DeltaPrimeVsNeumann => {
                let m = v.m_hat;
                let den = (-m.scale(strength)).offset(1.0).truncate(order - 1)?;
                guard_denominator(&den, guard, lambda0, mode)?;
                m.shift_derivative()?.scale(strength).try_div(&den)
            }
            FormulaId::DeltaPrimeVsFree => {
                let m = v.m_hat;
                let den = (-m.scale(strength)).offset(1.0).truncate(order - 1)?;
                guard_denominator(&den, guard, lambda0, mode)?;
                let m0 = m.truncate(order - 1)?;
                m.shift_derivative()?.try_div(&(m0 * den))
            }
            FormulaId::NeumannVsFree => {
                let m = v.m_hat;
                m.shift_derivative()?.try_div(&m.truncate(order - 1)?)
            }
        }
    };
    run().map_err(|e| e.in_mode(mode))
}

/// Taylor coefficient `m − 1` of the per-mode function.
pub fn term_from_values(
    which: FormulaId,
    strength: f64,
    v: &NtdModeValue,
    m: usize,
    guard: SpectralGuard,
    mode: usize,
) -> Result<f64> {
    Ok(mode_function(which, strength, v, guard, mode)?.coeff(m - 1))
}

/// Single per-mode term of a formula, without the multiplicity weight.
pub fn per_mode_term(
    which: FormulaId,
    mode: &ModeSpec,
    geom: &Geometry,
    coupling: Option<&Coupling>,
    m: usize,
    lambda0: f64,
) -> Result<f64> {
    let plan = EnginePlan::new(m, lambda0);
    validate_plan(&plan, geom, which)?;
    let strength = coupling_strength(which, coupling)?;
    let eval = NtdEvaluator::new(geom, lambda0, plan.jet_order(), mode.index)?;
    let v = eval.mode_value(mode.index)?;
    term_from_values(which, strength, &v, m, plan.guard, mode.index)
}

/// Power-law bound on the sum of all terms beyond the last one.
///
/// Returns `(bound, accepted)`; `accepted` is false when the recent terms do
/// not decay fast enough for the fit to be trusted, in which case the bound
/// falls back to `n_last·|last term|`.
pub fn tail_estimate(terms: &[ModeTerm]) -> (f64, bool) {
    let Some(last) = terms.last() else {
        return (0.0, false);
    };
    let window = &terms[terms.len().saturating_sub(TAIL_FIT_POINTS)..];
    if window.iter().all(|t| t.term == 0.0) {
        return (0.0, window.len() == TAIL_FIT_POINTS);
    }
    let fallback = last.index.max(1) as f64 * last.weighted().abs();
    let points: Vec<(f64, f64)> = window
        .iter()
        .map(|t| (t.index as f64, t.weighted()))
        .collect();
    let nonzero = points.iter().filter(|(n, t)| *n > 0.0 && *t != 0.0).count();
    if nonzero < 5 {
        return (fallback, false);
    }
    match PowerLawFit::fit(&points) {
        Some(fit) if -fit.slope > TAIL_MIN_EXPONENT => match fit.tail_integral(last.index as f64) {
            Some(bound) if bound.is_finite() => (bound, true),
            _ => (fallback, false),
        },
        _ => (fallback, false),
    }
}

fn tolerance(plan: &EnginePlan, value: f64) -> f64 {
    plan.abs_tol + plan.rel_tol * value.abs()
}

/// Evaluate one trace formula by adaptive summation over ascending modes.
///
/// Summation stops once [`STOP_RUN`] consecutive weighted terms fall below
/// `abs_tol + rel_tol·|partial sum|` and the fitted tail bound is within the
/// same tolerance. Reaching the mode ceiling first yields `converged = false`.
pub fn trace_formula(
    which: FormulaId,
    geom: &Geometry,
    coupling: Option<&Coupling>,
    plan: &EnginePlan,
) -> Result<TraceResult> {
    validate_plan(plan, geom, which)?;
    let strength = coupling_strength(which, coupling)?;
    let ceiling = plan.mode_cap.ceiling();
    let exact = matches!(plan.mode_cap, ModeCap::Exact(_));

    let mut chunk = if exact {
        ceiling
    } else {
        FIRST_CHUNK.min(ceiling)
    };
    let mut eval = NtdEvaluator::new(geom, plan.lambda0, plan.jet_order(), chunk)?;
    let mut sum = CompensatedSum::new();
    let mut terms: Vec<ModeTerm> = Vec::new();
    let mut small_run = 0usize;
    let mut converged = false;
    let mut tail_bound = 0.0;

    for n in 0..=ceiling {
        if n > chunk {
            chunk = (2 * chunk).min(ceiling);
            eval = NtdEvaluator::new(geom, plan.lambda0, plan.jet_order(), chunk)?;
        }
        let v = eval.mode_value(n)?;
        let term = term_from_values(which, strength, &v, plan.m, plan.guard, n)?;
        if !term.is_finite() {
            return Err(Error::Numeric(format!("non-finite term {term}")).in_mode(n));
        }
        let mode_term = ModeTerm {
            index: n,
            weight: geom.mode_weight(n),
            term,
        };
        sum.add(mode_term.weighted());
        terms.push(mode_term);
        if exact {
            continue;
        }

        if mode_term.weighted().abs() <= tolerance(plan, sum.value()) {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= STOP_RUN && terms.len() >= MIN_MODES {
            let (bound, accepted) = tail_estimate(&terms);
            if accepted && bound <= tolerance(plan, sum.value()) {
                converged = true;
                tail_bound = bound;
                break;
            }
        }
    }

    let value = sum.value();
    if !converged {
        let (bound, accepted) = tail_estimate(&terms);
        tail_bound = bound;
        converged = accepted && bound <= tolerance(plan, value);
    }
    Ok(TraceResult {
        value,
        modes_used: terms.len(),
        tail_bound,
        converged,
        per_mode: Some(terms),
    })
}

/// One [`TraceResult`] per grid point; failures are kept in their slot.
pub fn sweep(
    which: FormulaId,
    geom: &Geometry,
    coupling: Option<&Coupling>,
    plan: &EnginePlan,
    grid: &[f64],
) -> Vec<Result<TraceResult>> {
    grid.iter()
        .map(|&lambda0| {
            let point = EnginePlan { lambda0, ..*plan };
            trace_formula(which, geom, coupling, &point)
        })
        .collect()
}

/// Outcome of checking `deltaprime-vs-free = deltaprime-vs-neumann +
/// neumann-vs-free` on a common set of modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub deltaprime_vs_free: f64,
    pub deltaprime_vs_neumann: f64,
    pub neumann_vs_free: f64,
    pub modes_used: usize,
    /// `|A − (B + C)| / max(|A|, |B|, |C|)` for the summed traces.
    pub summed_rel_gap: f64,
    /// Largest per-mode gap, normalized the same way.
    pub max_mode_rel_gap: f64,
}

fn rel_gap(a: f64, b: f64, c: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - (b + c)).abs() / scale
    }
}

/// Check the splitting of the δ′-vs-free trace into the δ′-vs-Neumann and
/// Neumann-vs-free traces, per mode and summed. Modes `0..=cap` are used,
/// with `cap` taken from `plan.mode_cap` (adaptive caps resolve to the
/// number of modes the δ′-vs-free sum needs).
pub fn deltaprime_split_identity(
    geom: &Geometry,
    coupling: &Coupling,
    plan: &EnginePlan,
) -> Result<IdentityReport> {
    let c = Some(coupling);
    let cap = match plan.mode_cap {
        ModeCap::Exact(n) => n,
        _ => trace_formula(FormulaId::DeltaPrimeVsFree, geom, c, plan)?.modes_used - 1,
    };
    let exact = EnginePlan {
        mode_cap: ModeCap::Exact(cap),
        ..*plan
    };
    let a = trace_formula(FormulaId::DeltaPrimeVsFree, geom, c, &exact)?;
    let b = trace_formula(FormulaId::DeltaPrimeVsNeumann, geom, c, &exact)?;
    let n = trace_formula(FormulaId::NeumannVsFree, geom, c, &exact)?;
    let per_mode = |r: &TraceResult| r.per_mode.clone().unwrap_or_default();
    let max_mode_rel_gap = per_mode(&a)
        .iter()
        .zip(per_mode(&b).iter())
        .zip(per_mode(&n).iter())
        .map(|((x, y), z)| rel_gap(x.term, y.term, z.term))
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        deltaprime_vs_free: a.value,
        deltaprime_vs_neumann: b.value,
        neumann_vs_free: n.value,
        modes_used: a.modes_used,
        summed_rel_gap: rel_gap(a.value, b.value, n.value),
        max_mode_rel_gap,
    })
}
