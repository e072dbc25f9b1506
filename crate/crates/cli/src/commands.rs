use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use singtrace_core::{validate_plan, CouplingModel, Error, FormulaId, Result};
use singtrace_engine::bs_eigs::{bound_state_cutoff, bs_eigs, default_bracket};
use singtrace_engine::ntd::schatten_decay_probe;
use singtrace_engine::trace::{
    deltaprime_split_identity, sweep, trace_formula, IdentityReport, TraceResult,
};
use singtrace_oracle::{oracle_eigenvalues, oracle_trace};

use crate::args::{DecayArgs, EigsArgs, Guard, SweepArgs, TraceArgs, VerifyArgs};
use crate::output::{Diagnostics, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_NUMERIC
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Relative gap normalized by the larger magnitude; zero when both vanish.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub formula: FormulaId,
    pub dim: usize,
    pub radius: f64,
    pub m: usize,
    pub lambda: f64,
    pub strength: Option<f64>,
    pub value: f64,
    pub modes_used: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

pub fn trace(args: &TraceArgs) -> Result<Report<TraceResult, TraceRow>> {
    let start = Instant::now();
    let geom = args.geometry.geometry()?;
    let coupling = args.coupling.for_formula(args.formula)?;
    let plan = args.plan.plan(args.lambda);
    validate_plan(&plan, &geom, args.formula)?;
    let mut r = trace_formula(args.formula, &geom, coupling.as_ref(), &plan)?;
    if !args.per_mode {
        r.per_mode = None;
    }

    let mut human = String::new();
    writeln!(human, "formula     {}", args.formula).unwrap();
    writeln!(human, "value       {:.12e}", r.value).unwrap();
    writeln!(human, "modes used  {}", r.modes_used).unwrap();
    writeln!(human, "tail bound  {:.3e}", r.tail_bound).unwrap();
    writeln!(human, "converged   {}", r.converged).unwrap();
    if let Some(terms) = &r.per_mode {
        for t in terms {
            writeln!(
                human,
                "  mode {:>5}  weight {}  term {:.12e}",
                t.index, t.weight, t.term
            )
            .unwrap();
        }
    }
    let row = TraceRow {
        formula: args.formula,
        dim: geom.dim(),
        radius: geom.radius(),
        m: plan.m,
        lambda: plan.lambda0,
        strength: coupling.map(|c| c.strength),
        value: r.value,
        modes_used: r.modes_used,
        tail_bound: r.tail_bound,
        converged: r.converged,
    };
    Ok(Report {
        diagnostics: Diagnostics {
            modes_used: Some(r.modes_used),
            tail_bound: Some(r.tail_bound),
            wall_time_ms: elapsed_ms(start),
        },
        exit_code: if r.converged {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        },
        rows: vec![row],
        human,
        result: r,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub formula: FormulaId,
    pub engine: f64,
    pub engine_converged: bool,
    pub engine_tail_bound: f64,
    pub oracle: f64,
    pub oracle_error_estimate: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub deltaprime_vs_free: f64,
    pub deltaprime_vs_neumann: f64,
    pub neumann_vs_free: f64,
    pub modes_used: usize,
    pub summed_rel_gap: f64,
    pub max_mode_rel_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(r: IdentityReport, tol: f64, pass: bool) -> Self {
        IdentityCheck {
            deltaprime_vs_free: r.deltaprime_vs_free,
            deltaprime_vs_neumann: r.deltaprime_vs_neumann,
            neumann_vs_free: r.neumann_vs_free,
            modes_used: r.modes_used,
            summed_rel_gap: r.summed_rel_gap,
            max_mode_rel_gap: r.max_mode_rel_gap,
            tol,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum VerifyResult {
    Oracle(OracleComparison),
    Identity(IdentityCheck),
}

pub fn verify(args: &VerifyArgs) -> Result<Report<VerifyResult, VerifyResult>> {
    let start = Instant::now();
    let geom = args.geometry.geometry()?;
    let mut plan = args.plan.plan(args.lambda);

    if args.identity.is_some() {
        plan.guard = args.plan.guard.unwrap_or(Guard::ResolventSet).into();
        let coupling = args.coupling.for_model(CouplingModel::DeltaPrime)?;
        validate_plan(&plan, &geom, FormulaId::DeltaPrimeVsFree)?;
        let report = deltaprime_split_identity(&geom, &coupling, &plan)?;
        let tol = args.tol.unwrap_or(1e-10);
        let pass = report.summed_rel_gap <= tol && report.max_mode_rel_gap <= tol;
        let mut human = String::new();
        writeln!(
            human,
            "deltaprime-vs-free     {:.12e}",
            report.deltaprime_vs_free
        )
        .unwrap();
        writeln!(
            human,
            "deltaprime-vs-neumann  {:.12e}",
            report.deltaprime_vs_neumann
        )
        .unwrap();
        writeln!(
            human,
            "neumann-vs-free        {:.12e}",
            report.neumann_vs_free
        )
        .unwrap();
        writeln!(human, "modes used             {}", report.modes_used).unwrap();
        writeln!(
            human,
            "summed rel gap         {:.3e}",
            report.summed_rel_gap
        )
        .unwrap();
        writeln!(
            human,
            "max per-mode rel gap   {:.3e}",
            report.max_mode_rel_gap
        )
        .unwrap();
        writeln!(
            human,
            "{} (tol {tol:.1e})",
            if pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
        let modes_used = report.modes_used;
        let result = VerifyResult::Identity(IdentityCheck::new(report, tol, pass));
        return Ok(Report {
            rows: vec![result.clone()],
            result,
            human,
            diagnostics: Diagnostics {
                modes_used: Some(modes_used),
                tail_bound: None,
                wall_time_ms: elapsed_ms(start),
            },
            exit_code: if pass { EXIT_OK } else { EXIT_MISMATCH },
        });
    }

    let mut coupling_args = args.coupling.clone();
    if args.formula == FormulaId::DeltaVsFree
        && coupling_args.alpha.is_none()
        && coupling_args.omega.is_none()
    {
        coupling_args.alpha = Some(0.8);
    }
    let coupling = coupling_args.for_formula(args.formula)?;
    validate_plan(&plan, &geom, args.formula)?;
    let engine = trace_formula(args.formula, &geom, coupling.as_ref(), &plan)?;
    let cfg = args.oracle.config(&geom);
    let oracle = oracle_trace(
        args.formula,
        &geom,
        coupling.as_ref(),
        plan.m,
        plan.lambda0,
        &cfg,
    )?;
    let tol = args.tol.unwrap_or(5e-3);
    let gap = rel_gap(engine.value, oracle.value);
    let cmp = OracleComparison {
        formula: args.formula,
        engine: engine.value,
        engine_converged: engine.converged,
        engine_tail_bound: engine.tail_bound,
        oracle: oracle.value,
        oracle_error_estimate: oracle.error_estimate,
        abs_gap: (engine.value - oracle.value).abs(),
        rel_gap: gap,
        tol,
        pass: gap <= tol,
    };
    let mut human = String::new();
    writeln!(human, "formula    {}", cmp.formula).unwrap();
    writeln!(
        human,
        "engine     {:.12e}  (modes {}, tail {:.2e}, converged {})",
        cmp.engine, engine.modes_used, engine.tail_bound, engine.converged
    )
    .unwrap();
    writeln!(
        human,
        "oracle     {:.12e}  (± {:.2e})",
        cmp.oracle, cmp.oracle_error_estimate
    )
    .unwrap();
    writeln!(human, "abs gap    {:.3e}", cmp.abs_gap).unwrap();
    writeln!(human, "rel gap    {:.3e}", cmp.rel_gap).unwrap();
    writeln!(
        human,
        "{} (tol {tol:.1e})",
        if cmp.pass { "PASS" } else { "FAIL" }
    )
    .unwrap();
    let pass = cmp.pass;
    let result = VerifyResult::Oracle(cmp);
    Ok(Report {
        rows: vec![result.clone()],
        result,
        human,
        diagnostics: Diagnostics {
            modes_used: Some(engine.modes_used),
            tail_bound: Some(engine.tail_bound),
            wall_time_ms: elapsed_ms(start),
        },
        exit_code: if pass { EXIT_OK } else { EXIT_MISMATCH },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EigRow {
    pub mode: usize,
    pub multiplicity: usize,
    pub lambda: Option<f64>,
    pub residual: Option<f64>,
    pub oracle_lambda: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigsResult {
    pub bracket: (f64, f64),
    pub eigenvalues: Vec<EigRow>,
    /// Highest mode carrying a bound state, over all modes.
    pub cutoff_mode: Option<usize>,
    /// Whether engine and oracle find the same number of eigenvalues in
    /// every mode; present with `--cross-check`.
    pub counts_agree: Option<bool>,
}

pub fn eigs(args: &EigsArgs) -> Result<Report<EigsResult, EigRow>> {
    let start = Instant::now();
    let geom = args.geometry.geometry()?;
    let model: CouplingModel = args.model.into();
    let strength = args.coupling.for_model(model)?.strength;
    let (lo, hi) = default_bracket(&geom, strength);
    let bracket = (args.lambda_min.unwrap_or(lo), args.lambda_max.unwrap_or(hi));
    let (first, last) = args.modes;
    let found = bs_eigs(model, &geom, strength, first..=last, Some(bracket))?;
    let cutoff_mode = bound_state_cutoff(model, &geom, strength)?;

    let mut rows = Vec::new();
    let mut counts_agree = args.cross_check.then_some(true);
    let cfg = args.oracle.config(&geom);
    for n in first..=last {
        let mode = geom.mode(n);
        let engine: Vec<_> = found.iter().filter(|e| e.mode.index == n).collect();
        let oracle = if args.cross_check {
            oracle_eigenvalues(model, &mode, &geom, strength, &cfg)?
        } else {
            Vec::new()
        };
        if args.cross_check && oracle.len() != engine.len() {
            counts_agree = Some(false);
        }
        // At most one engine root per mode; pair it with the nearest oracle value.
        let mut unmatched = oracle.clone();
        for e in &engine {
            let nearest = unmatched
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - e.lambda).abs().total_cmp(&(b.1 - e.lambda).abs()))
                .map(|(i, _)| i);
            let oracle_lambda = nearest.map(|i| unmatched.remove(i));
            rows.push(EigRow {
                mode: n,
                multiplicity: e.multiplicity,
                lambda: Some(e.lambda),
                residual: Some(e.residual),
                oracle_lambda,
                gap: oracle_lambda.map(|o| (o - e.lambda).abs()),
            });
        }
        for o in unmatched {
            rows.push(EigRow {
                mode: n,
                multiplicity: mode.weight,
                lambda: None,
                residual: None,
                oracle_lambda: Some(o),
                gap: None,
            });
        }
    }

    let fmt =
        |v: Option<f64>, prec: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$e}"));
    let mut human = String::new();
    if rows.is_empty() {
        writeln!(
            human,
            "no eigenvalues in [{:.3e}, {:.3e}]",
            bracket.0, bracket.1
        )
        .unwrap();
    } else {
        write!(
            human,
            "{:>6} {:>5} {:>22} {:>10}",
            "mode", "mult", "lambda", "residual"
        )
        .unwrap();
        if args.cross_check {
            write!(human, " {:>22} {:>10}", "oracle", "gap").unwrap();
        }
        writeln!(human).unwrap();
        for r in &rows {
            write!(
                human,
                "{:>6} {:>5} {:>22} {:>10}",
                r.mode,
                r.multiplicity,
                fmt(r.lambda, 14),
                fmt(r.residual, 2)
            )
            .unwrap();
            if args.cross_check {
                write!(
                    human,
                    " {:>22} {:>10}",
                    fmt(r.oracle_lambda, 14),
                    fmt(r.gap, 2)
                )
                .unwrap();
            }
            writeln!(human).unwrap();
        }
    }
    if let Some(agree) = counts_agree {
        writeln!(human, "counts agree: {agree}").unwrap();
    }
    Ok(Report {
        diagnostics: Diagnostics {
            modes_used: Some(last - first + 1),
            tail_bound: None,
            wall_time_ms: elapsed_ms(start),
        },
        result: EigsResult {
            bracket,
            eigenvalues: rows.clone(),
            cutoff_mode,
            counts_agree,
        },
        rows,
        human,
        exit_code: EXIT_OK,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayResult {
    pub which: singtrace_engine::ntd::DecayTarget,
    pub k: usize,
    pub n_lo: usize,
    pub n_hi: usize,
    pub exponent: f64,
    pub prefactor: f64,
    pub points: usize,
}

pub fn decay(args: &DecayArgs) -> Result<Report<DecayResult, DecayResult>> {
    let start = Instant::now();
    let geom = args.geometry.geometry()?;
    let fit = schatten_decay_probe(
        args.which,
        args.k,
        &geom,
        args.lambda,
        args.n,
        args.abscissa.into(),
    )?;
    let result = DecayResult {
        which: args.which,
        k: args.k,
        n_lo: args.n.0,
        n_hi: args.n.1,
        exponent: fit.exponent,
        prefactor: fit.prefactor,
        points: fit.points,
    };
    let mut human = String::new();
    writeln!(human, "exponent   {:.6}", fit.exponent).unwrap();
    writeln!(human, "prefactor  {:.6e}", fit.prefactor).unwrap();
    writeln!(human, "points     {}", fit.points).unwrap();
    Ok(Report {
        rows: vec![result.clone()],
        result,
        human,
        diagnostics: Diagnostics {
            modes_used: Some(args.n.1 - args.n.0 + 1),
            tail_bound: None,
            wall_time_ms: elapsed_ms(start),
        },
        exit_code: EXIT_OK,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub value: Option<f64>,
    pub modes_used: Option<usize>,
    pub tail_bound: Option<f64>,
    pub converged: Option<bool>,
    /// `ok`, `not-converged` or the error message.
    pub status: String,
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<Report<Vec<SweepRow>, SweepRow>> {
    let start = Instant::now();
    let geom = args.geometry.geometry()?;
    let coupling = args.coupling.for_formula(args.formula)?;
    let grid = args.grid();
    if let Some(&first) = grid.first() {
        validate_plan(&args.plan.plan(first), &geom, args.formula)?;
    }
    let results = sweep(
        args.formula,
        &geom,
        coupling.as_ref(),
        &args.plan.plan(-1.0),
        &grid,
    );

    let mut code = EXIT_OK;
    let mut rows = Vec::with_capacity(grid.len());
    for (&lambda, r) in grid.iter().zip(results) {
        rows.push(match r {
            Ok(t) => {
                if !t.converged {
                    code = code.max(EXIT_NOT_CONVERGED);
                }
                SweepRow {
                    lambda,
                    value: Some(t.value),
                    modes_used: Some(t.modes_used),
                    tail_bound: Some(t.tail_bound),
                    converged: Some(t.converged),
                    status: if t.converged { "ok" } else { "not-converged" }.into(),
                }
            }
            Err(e) => {
                code = code.max(exit_code(&e));
                SweepRow {
                    lambda,
                    value: None,
                    modes_used: None,
                    tail_bound: None,
                    converged: None,
                    status: e.to_string(),
                }
            }
        });
    }

    let mut human = String::new();
    for r in &rows {
        match r.value {
            Some(v) => writeln!(human, "{:>14.6e}  {:>20.12e}  {}", r.lambda, v, r.status).unwrap(),
            None => writeln!(human, "{:>14.6e}  {:>20}  {}", r.lambda, "-", r.status).unwrap(),
        }
    }
    Ok(Report {
        diagnostics: Diagnostics {
            modes_used: rows.iter().filter_map(|r| r.modes_used).max(),
            tail_bound: rows.iter().filter_map(|r| r.tail_bound).reduce(f64::max),
            wall_time_ms: elapsed_ms(start),
        },
        result: rows.clone(),
        rows,
        human,
        exit_code: code,
    })
}
