use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use singtrace_core::{
    Coupling, CouplingModel, EnginePlan, Error, FormulaId, Geometry, ModeCap, Result, SpectralGuard,
};
use singtrace_engine::ntd::{DecayAbscissa, DecayTarget};
use singtrace_oracle::OracleConfig;

#[derive(Debug, Parser)]
#[command(
    name = "singtrace",
    version,
    about = "Traces of resolvent-power differences for δ and δ′ interactions on circles and spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a trace formula by mode summation.
    Trace(TraceArgs),
    /// Compare the engine against the finite-volume oracle, or check the
    /// δ′ splitting identity.
    Verify(VerifyArgs),
    /// Discrete eigenvalues from the Birman-Schwinger condition.
    Eigs(EigsArgs),
    /// Fit the decay of boundary-function jets over a range of modes.
    Decay(DecayArgs),
    /// Evaluate a trace formula along a grid of spectral parameters.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guard {
    BelowSpectrum,
    ResolventSet,
}

impl From<Guard> for SpectralGuard {
    fn from(g: Guard) -> Self {
        match g {
            Guard::BelowSpectrum => SpectralGuard::BelowSpectrum,
            Guard::ResolventSet => SpectralGuard::ResolventSet,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GeometryArgs {
    /// Space dimension (2 or 3).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Radius of the circle or sphere.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

impl GeometryArgs {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.dim, self.radius)
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CouplingArgs {
    /// δ strength.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// δ′ strength.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
}

impl CouplingArgs {
    /// The coupling a formula needs; a strength for the other model is a
    /// usage error.
    pub fn for_formula(&self, which: FormulaId) -> Result<Option<Coupling>> {
        match which.coupling_model() {
            None => {
                if self.alpha.is_some() || self.omega.is_some() {
                    return Err(Error::Usage(format!("{which} takes no coupling strength")));
                }
                Ok(None)
            }
            Some(model) => self.for_model(model).map(Some),
        }
    }

    pub fn for_model(&self, model: CouplingModel) -> Result<Coupling> {
        match (model, self.alpha, self.omega) {
            (CouplingModel::Delta, Some(a), None) => Coupling::delta(a),
            (CouplingModel::DeltaPrime, None, Some(w)) => Coupling::delta_prime(w),
            (CouplingModel::Delta, _, _) => Err(Error::Usage(
                "the delta model needs --alpha and no --omega".into(),
            )),
            (CouplingModel::DeltaPrime, _, _) => Err(Error::Usage(
                "the delta-prime model needs --omega and no --alpha".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Resolvent power.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = EnginePlan::DEFAULT_ABS_TOL)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = EnginePlan::DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Largest mode index of the adaptive sum.
    #[arg(long)]
    pub mode_cap: Option<usize>,
    /// Where λ may sit (default below-spectrum; identity checks default
    /// to resolvent-set).
    #[arg(long, value_enum)]
    pub guard: Option<Guard>,
}

impl PlanArgs {
    pub fn plan(&self, lambda: f64) -> EnginePlan {
        EnginePlan::new(self.m, lambda)
            .with_tolerances(self.abs_tol, self.rel_tol)
            .with_mode_cap(self.mode_cap.map_or(ModeCap::Auto, ModeCap::Fixed))
            .with_guard(self.guard.unwrap_or(Guard::BelowSpectrum).into())
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Oracle grid intervals.
    #[arg(long, default_value_t = OracleConfig::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Oracle outer radius (default 40·R).
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Highest mode summed by the oracle.
    #[arg(long, default_value_t = OracleConfig::DEFAULT_MODE_CAP)]
    pub oracle_mode_cap: usize,
    /// Worker threads (default: SINGTRACE_THREADS or all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl OracleArgs {
    pub fn config(&self, geom: &Geometry) -> OracleConfig {
        let mut cfg = OracleConfig::new(geom)
            .with_grid_points(self.grid_points)
            .with_mode_cap(self.oracle_mode_cap);
        if let Some(r) = self.r_max {
            cfg = cfg.with_r_max(r);
        }
        if let Some(t) = self.threads {
            cfg = cfg.with_threads(t);
        }
        cfg
    }
}

fn parse_formula(s: &str) -> std::result::Result<FormulaId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_decay_target(s: &str) -> std::result::Result<DecayTarget, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `a..b` or `a..=b` (both inclusive) or a single index.
pub fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad index '{t}': {e}"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if hi < lo {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long, value_parser = parse_formula)]
    pub formula: FormulaId,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Spectral parameter (negative).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Include the per-mode terms in the output.
    #[arg(long)]
    pub per_mode: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// δ′-vs-free = δ′-vs-Neumann + Neumann-vs-free.
    #[value(alias = "thm2")]
    DeltaprimeSplit,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_formula, default_value = "delta-vs-free")]
    pub formula: FormulaId,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = -2.0)]
    pub lambda: f64,
    /// Pass threshold on the relative gap (default 5e-3, or 1e-10 for
    /// identity checks).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Check an algebraic identity between engine traces instead of
    /// comparing with the oracle.
    #[arg(long, value_enum)]
    pub identity: Option<Identity>,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Delta,
    DeltaPrime,
}

impl From<ModelArg> for CouplingModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Delta => CouplingModel::Delta,
            ModelArg::DeltaPrime => CouplingModel::DeltaPrime,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EigsArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    /// Mode indices, inclusive (`0..5`).
    #[arg(long, value_parser = parse_range, default_value = "0..5")]
    pub modes: (usize, usize),
    /// Lower end of the search bracket.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    /// Upper end of the search bracket.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    /// Add oracle eigenvalues and their gaps.
    #[arg(long)]
    pub cross_check: bool,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbscissaArg {
    ModeIndex,
    Rank,
}

impl From<AbscissaArg> for DecayAbscissa {
    fn from(a: AbscissaArg) -> Self {
        match a {
            AbscissaArg::ModeIndex => DecayAbscissa::ModeIndex,
            AbscissaArg::Rank => DecayAbscissa::SingularValueRank,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DecayArgs {
    /// m-tilde or m-hat.
    #[arg(long, value_parser = parse_decay_target)]
    pub which: DecayTarget,
    /// Taylor coefficient in λ.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    pub lambda: f64,
    /// Mode indices of the fit, inclusive.
    #[arg(long, value_parser = parse_range, default_value = "100..1000")]
    pub n: (usize, usize),
    #[arg(long, value_enum, default_value_t = AbscissaArg::ModeIndex)]
    pub abscissa: AbscissaArg,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_formula)]
    pub formula: FormulaId,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// First spectral parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    /// Last spectral parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of equally spaced points, endpoints included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl SweepArgs {
    pub fn grid(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n)
                .map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}
