//! Exponentially scaled modified Bessel functions of integer order, in the
//! cylindrical (`Iₙ`, `Kₙ`) and spherical (`i_l`, `k_l`) families.
//!
//! Values are built from ratio tables: `I_{n+1}/Iₙ` by backward recurrence,
//! `K_{n−1}/Kₙ` by forward recurrence from `K₀, K₁`, each in its stable
//! direction. Absolute values come from a normalization sum (cylindrical) or
//! a closed form (spherical). Since `Iₙ(x)` underflows and `Kₙ(x)` overflows
//! long before `n = 10⁴`, a [`BesselPair`] stores both with a shared
//! logarithmic offset that cancels in their product.
//!
//! The spherical normalization is `i₀(x) = sinh(x)/x`, `k₀(x) = e^{−x}/x`.

use singtrace_core::summation::CompensatedSum;
use singtrace_core::{Error, Jet, Result, MAX_ORDER};

/// Default ceiling on the order `n` (or `l`).
pub const DEFAULT_ORDER_CAP: usize = 10_000;

/// Admissible argument range, exclusive at both ends.
pub const ARG_RANGE: (f64, f64) = (1e-8, 1e6);

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Which Bessel family: cylindrical for circles, spherical for spheres.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BesselKind {
    Cylindrical,
    Spherical,
}

impl BesselKind {
    pub fn for_dim(dim: usize) -> BesselKind {
        if dim == 3 {
            BesselKind::Spherical
        } else {
            BesselKind::Cylindrical
        }
    }

    /// Exponent `s` in `x²f″ + s·x·f′ − (x² + ν)f = 0`.
    pub fn first_order_coeff(self) -> f64 {
        match self {
            BesselKind::Cylindrical => 1.0,
            BesselKind::Spherical => 2.0,
        }
    }

    /// Separation constant `ν` of order `n`: `n²` or `l(l+1)`.
    pub fn separation(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            BesselKind::Cylindrical => n * n,
            BesselKind::Spherical => n * (n + 1.0),
        }
    }

    /// Indicial roots `(regular, decaying)` of the logarithmic derivative
    /// `z = x·f′/f` at `x → 0`.
    pub fn indicial_roots(self, n: usize) -> (f64, f64) {
        let n = n as f64;
        match self {
            BesselKind::Cylindrical => (n, -n),
            BesselKind::Spherical => (n, -(n + 1.0)),
        }
    }
}

/// Scaled Bessel values and argument derivatives of one order at one point.
///
/// With `L = log_shift`:
/// `i_scaled = e^{−x−L}·I(x)`, `di_scaled = e^{−x−L}·I′(x)`,
/// `k_scaled = e^{x+L}·K(x)`, `dk_scaled = e^{x+L}·K′(x)`.
/// `L` is zero unless one of the values would leave the `f64` range, so
/// `i_scaled·k_scaled = I·K` and `di_scaled·k_scaled − i_scaled·dk_scaled`
/// is the unscaled Wronskian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselPair {
    pub kind: BesselKind,
    pub order: usize,
    pub x: f64,
    pub i_scaled: f64,
    pub k_scaled: f64,
    pub di_scaled: f64,
    pub dk_scaled: f64,
    pub log_shift: f64,
}

impl BesselPair {
    /// `ln(e^{−x}·I(x))`.
    pub fn ln_i_scaled(&self) -> f64 {
        self.i_scaled.ln() + self.log_shift
    }

    /// `ln(e^{x}·K(x))`.
    pub fn ln_k_scaled(&self) -> f64 {
        self.k_scaled.ln() - self.log_shift
    }

    /// `I(x)·K(x)`.
    pub fn product(&self) -> f64 {
        self.i_scaled * self.k_scaled
    }

    /// `I′K − IK′`: `1/x` for the cylindrical family, `1/x²` for the
    /// spherical one.
    pub fn wronskian(&self) -> f64 {
        self.di_scaled * self.k_scaled - self.i_scaled * self.dk_scaled
    }

    /// The value the Wronskian must equal.
    pub fn expected_wronskian(&self) -> f64 {
        match self.kind {
            BesselKind::Cylindrical => 1.0 / self.x,
            BesselKind::Spherical => 1.0 / (self.x * self.x),
        }
    }
}

fn check_args(n: usize, x: f64, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Domain(format!(
            "Bessel order {n} exceeds the cap {cap}"
        )));
    }
    if !(x > ARG_RANGE.0 && x < ARG_RANGE.1) {
        return Err(Error::Domain(format!(
            "Bessel argument must lie in ({}, {}), got {x}",
            ARG_RANGE.0, ARG_RANGE.1
        )));
    }
    Ok(())
}

/// `(e^{x}K₀(x), e^{x}K₁(x))`: Temme's series for `x ≤ 2`, Steed's
/// continued fraction above.
pub fn k0_k1_scaled(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    const MAX_ITER: usize = 100_000;
    if x <= 2.0 {
        let mut ff = -EULER_GAMMA - (0.5 * x).ln();
        let mut sum = ff;
        let mut p = 0.5;
        let mut q = 0.5;
        let mut c = 1.0;
        let d = 0.25 * x * x;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi);
            c *= d / fi;
            p /= fi;
            q /= fi;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let e = x.exp();
        (sum * e, sum1 * 2.0 / x * e)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
        let k1 = k0 * (x + 0.5 - a1 * h) / x;
        (k0, k1)
    }
}

/// Ratio tables of one family at one argument, for orders `0..=n_max`.
///
/// `i_ratio[n] = f_{n+1}/f_n` for the regular solution and
/// `k_ratio[n] = g_{n−1}/g_n` for the decaying one, with `K₋₁ = K₁` and
/// `k₋₁ = k₀`.
#[derive(Clone, Debug)]
pub struct RatioTable {
    pub kind: BesselKind,
    pub x: f64,
    i_ratio: Vec<f64>,
    k_ratio: Vec<f64>,
    ln_i0: f64,
    ln_k0: f64,
}

impl RatioTable {
    pub fn new(kind: BesselKind, n_max: usize, x: f64) -> Result<Self> {
        Self::with_cap(kind, n_max, x, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(kind: BesselKind, n_max: usize, x: f64, cap: usize) -> Result<Self> {
        check_args(n_max, x, cap)?;

        // Backward recurrence for the regular ratios, started far enough
        // past both n_max and x that the zero seed has decayed away.
        let start = n_max + x.ceil() as usize + 64;
        let mut full = vec![0.0; start + 1];
        let mut r = 0.0;
        for n in (0..start).rev() {
            let a = match kind {
                BesselKind::Cylindrical => 2.0 * (n as f64 + 1.0) / x,
                BesselKind::Spherical => (2.0 * n as f64 + 3.0) / x,
            };
            r = 1.0 / (a + r);
            full[n] = r;
        }

        let ln_i0 = match kind {
            BesselKind::Cylindrical => {
                // e^x = I₀ + 2·Σ_{k≥1} I_k.
                let mut sum = CompensatedSum::new();
                let mut prod = 1.0;
                for &rk in &full[..start] {
                    prod *= rk;
                    if prod < 1e-300 {
                        break;
                    }
                    sum.add(prod);
                }
                -(1.0 + 2.0 * sum.value()).ln()
            }
            BesselKind::Spherical => (-(-2.0 * x).exp_m1() / (2.0 * x)).ln(),
        };
        full.truncate(n_max + 1);

        let mut k_ratio = Vec::with_capacity(n_max + 1);
        let ln_k0 = match kind {
            BesselKind::Cylindrical => {
                let (k0, k1) = k0_k1_scaled(x);
                k_ratio.push(k1 / k0);
                let mut s = k0 / k1;
                for n in 1..=n_max {
                    k_ratio.push(s);
                    s = 1.0 / (s + 2.0 * n as f64 / x);
                }
                k0.ln()
            }
            BesselKind::Spherical => {
                let mut s = 1.0;
                for l in 0..=n_max {
                    k_ratio.push(s);
                    s = 1.0 / (s + (2.0 * l as f64 + 1.0) / x);
                }
                -x.ln()
            }
        };

        Ok(RatioTable {
            kind,
            x,
            i_ratio: full,
            k_ratio,
            ln_i0,
            ln_k0,
        })
    }

    pub fn n_max(&self) -> usize {
        self.i_ratio.len() - 1
    }

    pub fn i_ratio(&self, n: usize) -> f64 {
        self.i_ratio[n]
    }

    pub fn k_ratio(&self, n: usize) -> f64 {
        self.k_ratio[n]
    }

    /// `x·f′/f` for the regular solution of order `n`.
    pub fn z_regular(&self, n: usize) -> f64 {
        self.kind.indicial_roots(n).0 + self.w_regular(n)
    }

    /// `x·g′/g` for the decaying solution of order `n`.
    pub fn z_decaying(&self, n: usize) -> f64 {
        self.kind.indicial_roots(n).1 + self.w_decaying(n)
    }

    /// `x·f′/f` minus its indicial root, without cancellation.
    pub fn w_regular(&self, n: usize) -> f64 {
        self.x * self.i_ratio[n]
    }

    /// `x·g′/g` minus its indicial root, without cancellation.
    pub fn w_decaying(&self, n: usize) -> f64 {
        -self.x * self.k_ratio[n]
    }

    /// Full scaled values and derivatives at order `n ≤ n_max`.
    pub fn pair(&self, n: usize) -> BesselPair {
        let mut ln_i = CompensatedSum::new();
        ln_i.add(self.ln_i0);
        for &r in &self.i_ratio[..n] {
            ln_i.add(r.ln());
        }
        let mut ln_k = CompensatedSum::new();
        ln_k.add(self.ln_k0);
        for &s in &self.k_ratio[1..=n] {
            ln_k.add(-s.ln());
        }
        let (ln_i, ln_k) = (ln_i.value(), ln_k.value());
        let log_shift = if ln_i.abs() < 650.0 && ln_k.abs() < 650.0 {
            0.0
        } else {
            0.5 * (ln_i - ln_k)
        };
        let i = (ln_i - log_shift).exp();
        let k = (ln_k + log_shift).exp();
        let x = self.x;
        let nf = n as f64;
        let (di, dk) = match self.kind {
            BesselKind::Cylindrical => (
                i * (self.i_ratio[n] + nf / x),
                -k * (self.k_ratio[n] + nf / x),
            ),
            BesselKind::Spherical => (
                i * (self.i_ratio[n] + nf / x),
                -k * (self.k_ratio[n] + (nf + 1.0) / x),
            ),
        };
        BesselPair {
            kind: self.kind,
            order: n,
            x,
            i_scaled: i,
            k_scaled: k,
            di_scaled: di,
            dk_scaled: dk,
            log_shift,
        }
    }
}

/// `Iₙ(x)`, `Kₙ(x)` and their derivatives, exponentially scaled.
pub fn bessel_pair(n: usize, x: f64) -> Result<BesselPair> {
    Ok(RatioTable::new(BesselKind::Cylindrical, n, x)?.pair(n))
}

/// `i_l(x)`, `k_l(x)` and their derivatives, exponentially scaled.
pub fn sph_bessel_pair(l: usize, x: f64) -> Result<BesselPair> {
    Ok(RatioTable::new(BesselKind::Spherical, l, x)?.pair(l))
}

/// Jets in `λ` of the four fields of a [`BesselPair`], evaluated along an
/// argument jet `x(λ)`. The jets share the pair's `log_shift` and include
/// the `e^{∓x(λ)}` scaling, so the Wronskian identity holds coefficient-wise.
#[derive(Clone, Copy, Debug)]
pub struct BesselJets {
    pub i: Jet,
    pub k: Jet,
    pub di: Jet,
    pub dk: Jet,
    pub log_shift: f64,
}

/// Taylor coefficients in `t` of a solution of
/// `x²f″ + s·x·f′ − (x² + ν)f = 0` about `x₀`, from `f(x₀)` and `f′(x₀)`.
fn ode_taylor(kind: BesselKind, n: usize, x0: f64, f0: f64, f1: f64, len: usize) -> Vec<f64> {
    let s = kind.first_order_coeff();
    let nu = kind.separation(n);
    let mut a = vec![0.0; len.max(2)];
    a[0] = f0;
    a[1] = f1;
    for k in 0..len.saturating_sub(2) {
        let kf = k as f64;
        let am1 = if k >= 1 { a[k - 1] } else { 0.0 };
        let am2 = if k >= 2 { a[k - 2] } else { 0.0 };
        let num = x0 * (kf + 1.0) * (2.0 * kf + s) * a[k + 1]
            + (kf * (kf - 1.0) + s * kf - x0 * x0 - nu) * a[k]
            - 2.0 * x0 * am1
            - am2;
        a[k + 2] = -num / (x0 * x0 * (kf + 1.0) * (kf + 2.0));
    }
    a.truncate(len);
    a
}

fn mul_series(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

fn exp_series(sign: f64, len: usize) -> Vec<f64> {
    let mut out = vec![1.0; len];
    for k in 1..len {
        out[k] = out[k - 1] * sign / k as f64;
    }
    out
}

fn derivative_series(a: &[f64]) -> Vec<f64> {
    (1..a.len()).map(|k| k as f64 * a[k]).collect()
}

fn pair_jet(kind: BesselKind, n: usize, arg: &Jet) -> Result<BesselJets> {
    let x0 = arg.value();
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!(
            "Bessel argument jet needs a positive constant term, got {x0}"
        )));
    }
    let pair = RatioTable::new(kind, n, x0)?.pair(n);
    let len = arg.order() + 2;
    // Series of the unscaled functions, up to the common constant factor
    // carried by the scaled seeds.
    let fi = ode_taylor(kind, n, x0, pair.i_scaled, pair.di_scaled, len);
    let fk = ode_taylor(kind, n, x0, pair.k_scaled, pair.dk_scaled, len);
    let em = exp_series(-1.0, len);
    let ep = exp_series(1.0, len);
    let i = mul_series(&fi, &em);
    let k = mul_series(&fk, &ep);
    let di = mul_series(&derivative_series(&fi), &em);
    let dk = mul_series(&derivative_series(&fk), &ep);
    Ok(BesselJets {
        i: Jet::compose(&i, arg),
        k: Jet::compose(&k, arg),
        di: Jet::compose(&di, arg),
        dk: Jet::compose(&dk, arg),
        log_shift: pair.log_shift,
    })
}

/// Cylindrical [`BesselJets`] of order `n` along the argument jet `arg`.
///
/// Taylor coefficients come from the Bessel ODE, which loses relative
/// accuracy roughly like `(n/x)^k` at order `k`; intended for moderate `n`.
pub fn bessel_pair_jet(n: usize, arg: &Jet) -> Result<BesselJets> {
    pair_jet(BesselKind::Cylindrical, n, arg)
}

/// Spherical analogue of [`bessel_pair_jet`].
pub fn sph_bessel_pair_jet(l: usize, arg: &Jet) -> Result<BesselJets> {
    pair_jet(BesselKind::Spherical, l, arg)
}

/// Taylor coefficients in `u − u₀` of the solution `F` of
/// `2u·F′ = u − β·F − F²` with `F(u₀) = f0`, up to `order`.
///
/// With `u = x²` and `F = z − z*`, this is the Riccati equation of the
/// logarithmic derivative `z = x·f′/f` of a Bessel-type solution whose
/// indicial root is `z*`, and `β = 2z* + s − 1`. The recurrence involves no
/// cancellation at large order `n`, unlike Taylor expansion of `f` itself.
pub fn riccati_series(beta: f64, u0: f64, f0: f64, order: usize) -> Result<Vec<f64>> {
    if order > MAX_ORDER {
        return Err(Error::Usage(format!(
            "series order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if !(u0 > 0.0) {
        return Err(Error::Domain(format!(
            "Riccati expansion point must be positive, got {u0}"
        )));
    }
    let mut c = Vec::with_capacity(order + 1);
    c.push(f0);
    for j in 0..order {
        let forcing = match j {
            0 => u0,
            1 => 1.0,
            _ => 0.0,
        };
        let square: f64 = (0..=j).map(|i| c[i] * c[j - i]).sum();
        let next =
            (forcing - (2.0 * j as f64 + beta) * c[j] - square) / (2.0 * u0 * (j as f64 + 1.0));
        c.push(next);
    }
    Ok(c)
}
