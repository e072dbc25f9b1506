//! Radial operators of one angular mode on a truncated grid.
//!
//! The quadratic form `∫|∇u|² + interface terms` restricted to a mode is
//! discretized with piecewise-constant cells around the nodes `rᵢ = i·h`:
//! exact cell measures as lumped masses, fluxes `r_{i+½}^{d−1}/h` between
//! neighbours and the angular term integrated exactly over each cell. This
//! is the finite-volume form of the flat-measure substitution
//! `v = r^{(d−1)/2}u`; the symmetrized matrix `M^{−½}KM^{−½}` is the
//! discrete operator. A Dirichlet wall sits at `r_max`; the origin node is
//! kept only for the angular index 0, where the solution need not vanish.
//!
//! Interface conditions at `R` (a grid node):
//! * δ: `u′(R⁺) − u′(R⁻) = −α·u(R)`, one diagonal entry shifted by `−α·R^{d−1}`;
//! * Neumann split: the interface cell is cut into two half cells with no
//!   flux between them;
//! * δ′: `u′` continuous and `−u′(R) = ω·(u(R⁺) − u(R⁻))`, the split cell
//!   plus the coupling block `−ω·R^{d−1}·[1 −1; −1 1]`.

use serde::{Deserialize, Serialize};
use singtrace_core::summation::CompensatedSum;
use singtrace_core::{Error, Geometry, Jet, ModeSpec, Result};

/// Discrete surrogate of one of the four operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialModel {
    Free,
    NeumannSplit,
    Delta,
    DeltaPrime,
}

/// How the trace of a resolvent-power difference is extracted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceRoute {
    /// Taylor coefficients of `log det(A − λ)` from jet-valued LDLᵀ pivots.
    /// Linear cost per mode.
    #[default]
    LogDet,
    /// Full spectra by implicit QL and sorted eigenvalue pairing.
    /// Quadratic cost per mode; meant for cross-checks on small grids.
    EigenPairing,
}

/// Eigenvalue pairing for [`TraceRoute::EigenPairing`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    #[default]
    Sorted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Number of grid intervals `N` on `[0, r_max]`.
    pub grid_points: usize,
    pub r_max: f64,
    /// Highest angular index summed explicitly.
    pub mode_cap: usize,
    pub pairing: Pairing,
    pub route: TraceRoute,
    /// Extrapolate from grids `N` and `N/2`.
    pub richardson: bool,
    /// Worker threads over modes; `None` reads `SINGTRACE_THREADS`.
    pub threads: Option<usize>,
}

impl OracleConfig {
    pub const DEFAULT_GRID_POINTS: usize = 8000;
    pub const DEFAULT_RMAX_FACTOR: f64 = 40.0;
    pub const DEFAULT_MODE_CAP: usize = 60;

    pub fn new(geom: &Geometry) -> Self {
        OracleConfig {
            grid_points: Self::DEFAULT_GRID_POINTS,
            r_max: Self::DEFAULT_RMAX_FACTOR * geom.radius(),
            mode_cap: Self::DEFAULT_MODE_CAP,
            pairing: Pairing::Sorted,
            route: TraceRoute::LogDet,
            richardson: true,
            threads: None,
        }
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid_points = n;
        self
    }

    pub fn with_mode_cap(mut self, cap: usize) -> Self {
        self.mode_cap = cap;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_route(mut self, route: TraceRoute) -> Self {
        self.route = route;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self, geom: &Geometry) -> Result<()> {
        let r = geom.radius();
        if !(self.r_max > 3.0 * r) || !self.r_max.is_finite() {
            return Err(Error::Config(format!(
                "r_max must exceed 3·R = {}, got {}",
                3.0 * r,
                self.r_max
            )));
        }
        if self.grid_points < 100 {
            return Err(Error::Config(format!(
                "grid needs at least 100 points, got {}",
                self.grid_points
            )));
        }
        if self.richardson && !self.grid_points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "Richardson extrapolation needs an even grid size, got {}",
                self.grid_points
            )));
        }
        interface_node(r, self.r_max, self.grid_points)?;
        if self.richardson {
            interface_node(r, self.r_max, self.grid_points / 2)?;
        }
        Ok(())
    }

    /// Grid sizes used by one evaluation, finest first.
    pub fn grids(&self) -> Vec<usize> {
        if self.richardson {
            vec![self.grid_points, self.grid_points / 2]
        } else {
            vec![self.grid_points]
        }
    }
}

fn interface_node(radius: f64, r_max: f64, n: usize) -> Result<usize> {
    let h = r_max / n as f64;
    let k = (radius / h).round();
    if (k * h - radius).abs() > 1e-9 * radius || k < 1.0 {
        return Err(Error::Config(format!(
            "interface radius {radius} is not a node of the grid with spacing {h}"
        )));
    }
    Ok(k as usize)
}

/// Symmetric tridiagonal pencil `K − λ·M` with diagonal lumped mass `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialOperator {
    pub model: RadialModel,
    pub mode: ModeSpec,
    pub dim: usize,
    pub h: f64,
    /// Row of the interface node (first half cell for split models).
    pub interface: usize,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Assemble the discrete operator of one mode on a grid of `n` intervals.
pub fn build_radial_on(
    model: RadialModel,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    r_max: f64,
    n: usize,
) -> Result<RadialOperator> {
    let dim = geom.dim();
    let radius = geom.radius();
    let h = r_max / n as f64;
    let k = interface_node(radius, r_max, n)?;
    let split = matches!(model, RadialModel::NeumannSplit | RadialModel::DeltaPrime);
    let angular = geom.angular_eigenvalue(mode.index);
    let start = if mode.index == 0 { 0 } else { 1 };

    // Cells as (lo, hi, node radius); a split interface contributes two.
    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(n + 1);
    let mut interface = 0;
    for i in start..n {
        let r = i as f64 * h;
        let lo = (r - 0.5 * h).max(0.0);
        let hi = r + 0.5 * h;
        if i == k {
            interface = cells.len();
            if split {
                cells.push((lo, r, r));
                cells.push((r, hi, r));
                continue;
            }
        }
        cells.push((lo, hi, r));
    }

    let d = dim as i32;
    let mass: Vec<f64> = cells
        .iter()
        .map(|&(lo, hi, _)| (hi.powi(d) - lo.powi(d)) / dim as f64)
        .collect();
    let mut diag: Vec<f64> = cells
        .iter()
        .map(|&(lo, hi, _)| {
            if angular == 0.0 {
                0.0
            } else if dim == 2 {
                angular * (hi / lo).ln()
            } else {
                angular * (hi - lo)
            }
        })
        .collect();
    let mut off = vec![0.0; cells.len().saturating_sub(1)];
    for j in 0..off.len() {
        let (_, _, r) = cells[j];
        let (_, _, r2) = cells[j + 1];
        if r2 == r {
            // The two halves of a split interface cell: no flux.
            continue;
        }
        let flux = (0.5 * (r + r2)).powi(d - 1) / h;
        diag[j] += flux;
        diag[j + 1] += flux;
        off[j] -= flux;
    }
    // Flux into the Dirichlet wall at r_max.
    let last = cells.len() - 1;
    diag[last] += (cells[last].2 + 0.5 * h).powi(d - 1) / h;

    let weight = strength * radius.powi(d - 1);
    match model {
        RadialModel::Delta => diag[interface] -= weight,
        RadialModel::DeltaPrime => {
            diag[interface] -= weight;
            diag[interface + 1] -= weight;
            off[interface] += weight;
        }
        RadialModel::Free | RadialModel::NeumannSplit => {}
    }

    Ok(RadialOperator {
        model,
        mode: *mode,
        dim,
        h,
        interface,
        diag,
        off,
        mass,
    })
}

/// Assemble on the finest grid of `cfg`.
pub fn build_radial(
    model: RadialModel,
    mode: &ModeSpec,
    geom: &Geometry,
    strength: f64,
    cfg: &OracleConfig,
) -> Result<RadialOperator> {
    cfg.validate(geom)?;
    build_radial_on(model, mode, geom, strength, cfg.r_max, cfg.grid_points)
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Diagonal and off-diagonal of `M^{−½}·K·M^{−½}`.
    pub fn symmetric(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self
            .diag
            .iter()
            .zip(&self.mass)
            .map(|(a, m)| a / m)
            .collect();
        let e = self
            .off
            .iter()
            .enumerate()
            .map(|(i, b)| b / (self.mass[i] * self.mass[i + 1]).sqrt())
            .collect();
        (d, e)
    }

    /// Number of eigenvalues strictly below `lambda` (Sylvester inertia of
    /// `K − λM`).
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut prev = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 {
                self.off[i - 1] * self.off[i - 1] / prev
            } else {
                0.0
            };
            let mut p = self.diag[i] - lambda * self.mass[i] - coupling;
            if p == 0.0 {
                p = -f64::EPSILON * (self.diag[i].abs() + lambda.abs() * self.mass[i]);
            }
            if p < 0.0 {
                count += 1;
            }
            prev = p;
        }
        count
    }

    /// Lower bound on the spectrum by Gershgorin discs of the symmetric form.
    pub fn spectrum_lower_bound(&self) -> f64 {
        let (d, e) = self.symmetric();
        (0..d.len())
            .map(|i| {
                let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
                let right = if i < e.len() { e[i].abs() } else { 0.0 };
                d[i] - left - right
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues below `upper`, ascending, by Sturm bisection.
    pub fn eigenvalues_below(&self, upper: f64) -> Vec<f64> {
        let count = self.count_below(upper);
        let lower = self.spectrum_lower_bound() - 1.0;
        (0..count)
            .map(|j| {
                // The (j+1)-th eigenvalue: smallest λ with count_below(λ) > j.
                let (mut lo, mut hi) = (lower, upper);
                for _ in 0..200 {
                    if hi - lo <= 1e-15 * lo.abs().max(hi.abs()).max(1e-300) {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count_below(mid) > j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Taylor coefficients of `log det(K − λM)` at `λ₀` up to `order`.
    ///
    /// Fails with [`Error::AboveSpectrum`] when a pivot is non-positive,
    /// i.e. when `λ₀` is not below the whole discrete spectrum.
    pub fn log_det_jet(&self, lambda0: f64, order: usize) -> Result<Vec<f64>> {
        if order == 0 {
            return Err(Error::Usage("log-det jets need order at least 1".into()));
        }
        let mut sums = vec![CompensatedSum::new(); order + 1];
        let mut coeffs = vec![0.0; order + 1];
        let mut prev: Option<Jet> = None;
        for i in 0..self.len() {
            coeffs[0] = self.diag[i] - lambda0 * self.mass[i];
            coeffs[1] = -self.mass[i];
            let mut p = Jet::from_coeffs(lambda0, &coeffs)?;
            if let Some(q) = prev {
                let b2 = self.off[i - 1] * self.off[i - 1];
                if b2 != 0.0 {
                    p = p - q.recip()?.scale(b2);
                }
            }
            if !(p.value() > 0.0) {
                return Err(Error::AboveSpectrum {
                    lambda: lambda0,
                    mode: self.mode.index,
                    denominator: p.value(),
                });
            }
            let lp = p.ln()?;
            for (s, c) in sums.iter_mut().zip(lp.coeffs()) {
                s.add(*c);
            }
            prev = Some(p);
        }
        Ok(sums.iter().map(CompensatedSum::value).collect())
    }

    /// All eigenvalues, ascending, by implicit QL on the symmetric form.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (mut d, e) = self.symmetric();
        let mut e = e;
        e.push(0.0);
        tql(&mut d, &mut e)
            .map_err(|msg| Error::Numeric(format!("{msg} (mode {})", self.mode.index)))?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix (diagonal `d`, sub-diagonal
/// `e` with `e[n−1]` unused) by the implicit QL algorithm with Wilkinson
/// shifts. Overwrites `d` with the eigenvalues, unsorted.
fn tql(d: &mut [f64], e: &mut [f64]) -> std::result::Result<(), String> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err("QL iteration did not converge".into());
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
