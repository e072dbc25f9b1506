//! Mode-summed traces and bound states from the radial discretization.

use std::thread;

use serde::{Deserialize, Serialize};
use singtrace_core::summation::CompensatedSum;
use singtrace_core::{
    validate_plan, Coupling, CouplingModel, EnginePlan, Error, FormulaId, Geometry, ModeSpec,
    PowerLawFit, Result,
};

use crate::radial::{build_radial_on, OracleConfig, RadialModel, RadialOperator, TraceRoute};

const TAIL_FIT_POINTS: usize = 10;
const TAIL_CHECK_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleModeTerm {
    pub index: usize,
    pub weight: usize,
    /// Extrapolated unweighted term.
    pub term: f64,
    /// Unweighted term on the finest grid alone.
    pub fine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Weighted sum over modes `0..=mode_cap`.
    pub partial_sum: f64,
    /// Power-law extrapolation of the modes above the cap.
    pub mode_tail: f64,
    /// Total change made by grid extrapolation.
    pub richardson_correction: f64,
    pub grid_points: usize,
    pub per_mode: Vec<OracleModeTerm>,
}

/// Worker count: the configured value, else `SINGTRACE_THREADS`, else the
/// available parallelism.
pub fn thread_count(cfg: &OracleConfig) -> usize {
    cfg.threads
        .or_else(|| {
            std::env::var("SINGTRACE_THREADS")
                .ok()
                .and_then(|s| s.trim().parse().ok())
        })
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Evaluate `f(0..count)` on `threads` workers. Results come back in index
/// order whatever the schedule, so reductions over them are deterministic.
fn par_map<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, count.max(1));
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                s.spawn(move || {
                    (w..count)
                        .step_by(threads)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("oracle worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots
        .into_iter()
        .map(|v| v.expect("every index is assigned"))
        .collect()
}

fn models(which: FormulaId) -> (RadialModel, RadialModel) {
    match which {
        FormulaId::DeltaVsFree => (RadialModel::Delta, RadialModel::Free),
        FormulaId::DeltaPrimeVsNeumann => (RadialModel::DeltaPrime, RadialModel::NeumannSplit),
        FormulaId::DeltaPrimeVsFree => (RadialModel::DeltaPrime, RadialModel::Free),
        FormulaId::NeumannVsFree => (RadialModel::NeumannSplit, RadialModel::Free),
    }
}

fn strength_for(which: FormulaId, coupling: Option<&Coupling>) -> Result<f64> {
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

fn power_trace(
    op: &RadialOperator,
    m: usize,
    lambda0: f64,
    route: TraceRoute,
) -> Result<TraceParts> {
    match route {
        TraceRoute::LogDet => Ok(TraceParts::LogDet(op.log_det_jet(lambda0, m)?[m])),
        TraceRoute::EigenPairing => {
            let eig = op.eigenvalues()?;
            if let Some(&low) = eig.first() {
                if !(low > lambda0) {
                    return Err(Error::AboveSpectrum {
                        lambda: lambda0,
                        mode: op.mode.index,
                        denominator: low - lambda0,
                    });
                }
            }
            Ok(TraceParts::Spectrum(eig))
        }
    }
}

enum TraceParts {
    LogDet(f64),
    Spectrum(Vec<f64>),
}

/// `tr[(A − λ₀)^{−m} − (B − λ₀)^{−m}]` restricted to one mode, on a grid of
/// `n` intervals, unweighted.
#[allow(clippy::too_many_arguments)]
pub fn oracle_mode_term(
    which: FormulaId,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    m: usize,
    lambda0: f64,
    r_max: f64,
    n: usize,
    route: TraceRoute,
) -> Result<f64> {
    let (ma, mb) = models(which);
    let a = build_radial_on(ma, mode, geom, strength, r_max, n)?;
    let b = build_radial_on(mb, mode, geom, strength, r_max, n)?;
    let pa = power_trace(&a, m, lambda0, route)?;
    let pb = power_trace(&b, m, lambda0, route)?;
    Ok(match (pa, pb) {
        (TraceParts::LogDet(ca), TraceParts::LogDet(cb)) => -(m as f64) * (ca - cb),
        (TraceParts::Spectrum(ea), TraceParts::Spectrum(eb)) => {
            // Sorted pairing; eigenvalues beyond the shorter list enter alone.
            let p = |mu: f64| (mu - lambda0).powi(-(m as i32));
            let mut acc = CompensatedSum::new();
            for (x, y) in ea.iter().zip(&eb) {
                acc.add(p(*x) - p(*y));
            }
            let k = ea.len().min(eb.len());
            acc.extend(ea[k..].iter().map(|&x| p(x)));
            acc.extend(eb[k..].iter().map(|&y| -p(y)));
            acc.value()
        }
        _ => unreachable!("both operators use the same route"),
    })
}

fn tail_from(terms: &[OracleModeTerm], points: usize, from: f64) -> Option<f64> {
    if terms.len() < points {
        return None;
    }
    let window = &terms[terms.len() - points..];
    let weighted: Vec<(f64, f64)> = window
        .iter()
        .map(|t| (t.index as f64, t.weight as f64 * t.term))
        .collect();
    let sign = weighted[0].1.signum();
    if weighted
        .iter()
        .any(|&(_, w)| w == 0.0 || w.signum() != sign)
    {
        return None;
    }
    let fit = PowerLawFit::fit(&weighted)?;
    Some(sign * fit.tail_integral(from)?)
}

/// Oracle value of `tr[(A − λ₀)^{−m} − (B − λ₀)^{−m}]` for a formula.
///
/// Modes `0..=mode_cap` are computed on grids `N` and `N/2` and combined
/// by Richardson extrapolation for the second-order discretization; the
/// modes above the cap are replaced by a power-law fit of the last ten
/// weighted terms, integrated from `cap + ½`.
///
/// The error estimate adds the Richardson correction, the disagreement of
/// two tail fits and the decay `e^{−2κ(r_max − R)}` of the domain
/// truncation, relative to the value.
pub fn oracle_trace(
    which: FormulaId,
    geom: &Geometry,
    coupling: Option<&Coupling>,
    m: usize,
    lambda0: f64,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    validate_plan(&EnginePlan::new(m, lambda0), geom, which)?;
    cfg.validate(geom)?;
    let strength = strength_for(which, coupling)?;
    let grids = cfg.grids();

    let results = par_map(
        cfg.mode_cap + 1,
        thread_count(cfg),
        |n| -> Result<OracleModeTerm> {
            let mode = geom.mode(n);
            let vals = grids
                .iter()
                .map(|&g| {
                    oracle_mode_term(
                        which, &mode, geom, strength, m, lambda0, cfg.r_max, g, cfg.route,
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            let term = match vals.as_slice() {
                [fine, coarse] => fine + (fine - coarse) / 3.0,
                [fine] => *fine,
                _ => unreachable!("one or two grids"),
            };
            Ok(OracleModeTerm {
                index: n,
                weight: mode.weight,
                term,
                fine: vals[0],
            })
        },
    );
    let per_mode = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut partial = CompensatedSum::new();
    let mut correction = CompensatedSum::new();
    for t in &per_mode {
        partial.add(t.weight as f64 * t.term);
        correction.add(t.weight as f64 * (t.term - t.fine));
    }
    let partial_sum = partial.value();
    let richardson_correction = correction.value();

    let from = cfg.mode_cap as f64 + 0.5;
    let tail = tail_from(&per_mode, TAIL_FIT_POINTS, from);
    let check = tail_from(&per_mode, TAIL_CHECK_POINTS, from);
    let mode_tail = tail.unwrap_or(0.0);
    let tail_error = match (tail, check) {
        (Some(a), Some(b)) => (a - b).abs(),
        // No usable fit: the last weighted term times the cap bounds a tail
        // decaying at least like n^{−2}.
        _ => per_mode.last().map_or(0.0, |t| {
            (t.weight as f64 * t.term).abs() * cfg.mode_cap as f64
        }),
    };

    let value = partial_sum + mode_tail;
    let kappa = (-lambda0).sqrt();
    let domain = value.abs() * (-2.0 * kappa * (cfg.r_max - geom.radius())).exp();
    Ok(OracleResult {
        value,
        error_estimate: richardson_correction.abs() + tail_error + domain,
        partial_sum,
        mode_tail,
        richardson_correction,
        grid_points: cfg.grid_points,
        per_mode,
    })
}

/// Negative eigenvalues of the δ or δ′ operator in one mode, ascending,
/// by Sturm bisection on grids `N` and `N/2` with Richardson extrapolation.
/// When the two grids disagree on the count the fine-grid values are
/// returned unextrapolated.
pub fn oracle_eigenvalues(
    model: CouplingModel,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    cfg.validate(geom)?;
    let radial = match model {
        CouplingModel::Delta => RadialModel::Delta,
        CouplingModel::DeltaPrime => RadialModel::DeltaPrime,
    };
    let spectra = cfg
        .grids()
        .iter()
        .map(|&n| {
            build_radial_on(radial, mode, geom, strength, cfg.r_max, n)
                .map(|op| op.eigenvalues_below(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(match spectra.as_slice() {
        [fine, coarse] if fine.len() == coarse.len() => fine
            .iter()
            .zip(coarse)
            .map(|(f, c)| f + (f - c) / 3.0)
            .collect(),
        [fine, ..] => fine.clone(),
        [] => Vec::new(),
    })
}
