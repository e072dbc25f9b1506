//! Truncated Taylor series ("jets") in the spectral parameter.
//!
//! A [`Jet`] of order `K` at base point `λ₀` stores the normalized Taylor
//! coefficients `f⁽ᵏ⁾(λ₀)/k!` for `k = 0..=K`. Sums, products and quotients
//! of jets are the exact truncations of the corresponding holomorphic
//! functions, so the Leibniz rule and the derivative of an inverse come out
//! of plain Cauchy-product arithmetic. Coefficient `k` of a jet equals the
//! `k`-fold derivative divided by `k!`, which is exactly the normalization the
//! trace formulae ask for.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 8;

/// Relative size below which a divisor's constant term counts as zero.
pub const SINGULAR_RTOL: f64 = 1e-13;

/// Binary operation selector for [`jet_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Truncated Taylor expansion of a real function of `λ` around `base_point`.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    base_point: f64,
    order: usize,
    coeffs: [f64; MAX_ORDER + 1],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("base_point", &self.base_point)
            .field("coeffs", &self.coeffs())
            .finish()
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Usage(format!(
            "jet order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

impl Jet {
    fn zero(base_point: f64, order: usize) -> Self {
        Jet {
            base_point,
            order,
            coeffs: [0.0; MAX_ORDER + 1],
        }
    }

    /// The constant function `c`.
    pub fn constant(c: f64, base_point: f64, order: usize) -> Result<Self> {
        check_order(order)?;
        let mut jet = Jet::zero(base_point, order);
        jet.coeffs[0] = c;
        Ok(jet)
    }

    /// The identity `f(λ) = λ`; needs `order ≥ 1` to carry the slope.
    pub fn variable(base_point: f64, order: usize) -> Result<Self> {
        check_order(order)?;
        if order == 0 {
            return Err(Error::Usage(
                "an order-0 jet cannot represent the identity function".into(),
            ));
        }
        let mut jet = Jet::zero(base_point, order);
        jet.coeffs[0] = base_point;
        jet.coeffs[1] = 1.0;
        Ok(jet)
    }

    /// Build a jet from explicit normalized coefficients; the order is
    /// `coeffs.len() - 1`.
    pub fn from_coeffs(base_point: f64, coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Usage("a jet needs at least one coefficient".into()));
        }
        let order = coeffs.len() - 1;
        check_order(order)?;
        let mut jet = Jet::zero(base_point, order);
        jet.coeffs[..=order].copy_from_slice(coeffs);
        Ok(jet)
    }

    /// Jet of `κ(λ) = √(−λ)`, defined for `λ₀ < 0`.
    pub fn kappa(base_point: f64, order: usize) -> Result<Self> {
        check_order(order)?;
        if !(base_point < 0.0) {
            return Err(Error::Domain(format!(
                "kappa(λ) = sqrt(-λ) needs λ < 0, got {base_point}"
            )));
        }
        let mut minus_lambda = Jet::zero(base_point, order);
        minus_lambda.coeffs[0] = -base_point;
        if order >= 1 {
            minus_lambda.coeffs[1] = -1.0;
        }
        minus_lambda.sqrt()
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..=self.order]
    }

    /// Function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficient `k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        if k <= self.order {
            self.coeffs[k]
        } else {
            0.0
        }
    }

    /// The plain `k`-th derivative `f⁽ᵏ⁾(λ₀) = k!·coeff(k)`.
    pub fn derivative(&self, k: usize) -> f64 {
        let factorial: f64 = (1..=k).map(|j| j as f64).product();
        factorial * self.coeff(k)
    }

    /// Evaluate the truncated polynomial at `λ₀ + offset`.
    pub fn eval_offset(&self, offset: f64) -> f64 {
        self.coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * offset + c)
    }

    /// Size of the jet measured in the natural scale `|λ₀|` of the base point,
    /// so that rapidly growing coefficients of functions with a nearby branch
    /// point do not masquerade as a large jet.
    pub fn scaled_norm(&self) -> f64 {
        let scale = if self.base_point != 0.0 {
            self.base_point.abs()
        } else {
            1.0
        };
        let mut weight = 1.0;
        let mut norm: f64 = 0.0;
        for &c in self.coeffs() {
            norm = norm.max(c.abs() * weight);
            weight *= scale;
        }
        norm
    }

    fn compatible(&self, other: &Jet) -> Result<()> {
        if self.order != other.order {
            return Err(Error::Usage(format!(
                "jet order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        if self.base_point != other.base_point {
            return Err(Error::Usage(format!(
                "jet base point mismatch: {} vs {}",
                self.base_point, other.base_point
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.compatible(other)?;
        let mut out = *self;
        for k in 0..=self.order {
            out.coeffs[k] += other.coeffs[k];
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.compatible(other)?;
        let mut out = *self;
        for k in 0..=self.order {
            out.coeffs[k] -= other.coeffs[k];
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.compatible(other)?;
        let mut out = Jet::zero(self.base_point, self.order);
        for i in 0..=self.order {
            for j in 0..=self.order - i {
                out.coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Ok(out)
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.compatible(other)?;
        let b0 = other.coeffs[0];
        if b0 == 0.0 || b0.abs() < SINGULAR_RTOL * other.scaled_norm() {
            return Err(Error::Singularity {
                base_point: self.base_point,
                mode: None,
            });
        }
        let mut out = Jet::zero(self.base_point, self.order);
        for k in 0..=self.order {
            let mut s = self.coeffs[k];
            for j in 0..k {
                s -= out.coeffs[j] * other.coeffs[k - j];
            }
            out.coeffs[k] = s / b0;
        }
        Ok(out)
    }

    pub fn arith(&self, other: &Jet, op: ArithOp) -> Result<Jet> {
        match op {
            ArithOp::Add => self.try_add(other),
            ArithOp::Sub => self.try_sub(other),
            ArithOp::Mul => self.try_mul(other),
            ArithOp::Div => self.try_div(other),
        }
    }

    /// `1/f`.
    pub fn recip(&self) -> Result<Jet> {
        let one = Jet::constant(1.0, self.base_point, self.order)?;
        one.try_div(self)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        let mut out = *self;
        for c in out.coeffs[..=self.order].iter_mut() {
            *c *= factor;
        }
        out
    }

    /// `f + c` for a scalar `c`.
    pub fn offset(&self, c: f64) -> Jet {
        let mut out = *self;
        out.coeffs[0] += c;
        out
    }

    /// Square root of a jet with positive constant term.
    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!(
                "square root of a jet needs a positive constant term, got {a0}"
            )));
        }
        let mut out = Jet::zero(self.base_point, self.order);
        out.coeffs[0] = a0.sqrt();
        for k in 1..=self.order {
            let mut s = self.coeffs[k];
            for j in 1..k {
                s -= out.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = s / (2.0 * out.coeffs[0]);
        }
        Ok(out)
    }

    /// Natural logarithm of a jet with positive constant term.
    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!(
                "logarithm of a jet needs a positive constant term, got {a0}"
            )));
        }
        let mut out = Jet::zero(self.base_point, self.order);
        out.coeffs[0] = a0.ln();
        for k in 1..=self.order {
            let mut s = k as f64 * self.coeffs[k];
            for j in 1..k {
                s -= j as f64 * out.coeffs[j] * self.coeffs[k - j];
            }
            out.coeffs[k] = s / (k as f64 * a0);
        }
        Ok(out)
    }

    pub fn exp(&self) -> Jet {
        let mut out = Jet::zero(self.base_point, self.order);
        out.coeffs[0] = self.coeffs[0].exp();
        for k in 1..=self.order {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = s / k as f64;
        }
        out
    }

    /// Jet of `f′` from a jet of `f`; the order drops by one.
    pub fn shift_derivative(&self) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::Usage("cannot differentiate an order-0 jet".into()));
        }
        let mut out = Jet::zero(self.base_point, self.order - 1);
        for k in 0..self.order {
            out.coeffs[k] = (k + 1) as f64 * self.coeffs[k + 1];
        }
        Ok(out)
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet> {
        if order > self.order {
            return Err(Error::Usage(format!(
                "cannot truncate an order-{} jet to order {order}",
                self.order
            )));
        }
        let mut out = Jet::zero(self.base_point, order);
        out.coeffs[..=order].copy_from_slice(&self.coeffs[..=order]);
        Ok(out)
    }

    /// Compose a power series `g(t) = Σ series[j]·tʲ` with `t = inner − inner(λ₀)`.
    ///
    /// Only `series[..=order]` contributes, since `t` has no constant term.
    pub fn compose(series: &[f64], inner: &Jet) -> Jet {
        let mut shift = *inner;
        shift.coeffs[0] = 0.0;
        let top = series.len().min(inner.order + 1);
        let mut out = Jet::zero(inner.base_point, inner.order);
        for &c in series[..top].iter().rev() {
            out = out * shift;
            out.coeffs[0] += c;
        }
        out
    }
}

/// Checked binary arithmetic on jets.
pub fn jet_arith(a: &Jet, b: &Jet, op: ArithOp) -> Result<Jet> {
    a.arith(b, op)
}

// The operator impls are for call sites where operands are built at a common
// base point and order by construction; mismatches there are programming
// errors and panic.

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.try_add(&rhs)
            .expect("jet operands must share base point and order")
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.try_sub(&rhs)
            .expect("jet operands must share base point and order")
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.try_mul(&rhs)
            .expect("jet operands must share base point and order")
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
