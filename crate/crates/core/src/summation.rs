//! Compensated summation and power-law tail extrapolation for slowly
//! convergent mode sums.

/// Neumaier's variant of Kahan summation; robust when an addend exceeds the
/// running sum in magnitude.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values);
    acc.value()
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `|term(n)| ≈ prefactor · n^slope`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub slope: f64,
}

impl PowerLawFit {
    /// Fit in log-log space; points with non-positive abscissa or zero
    /// ordinate are skipped.
    pub fn fit(points: &[(f64, f64)]) -> Option<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|(n, t)| *n > 0.0 && *t != 0.0 && t.is_finite())
            .map(|(n, t)| (n.ln(), t.abs().ln()))
            .unzip();
        let (slope, intercept) = least_squares_line(&xs, &ys)?;
        Some(PowerLawFit {
            prefactor: intercept.exp(),
            slope,
        })
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.prefactor * n.powf(self.slope)
    }

    /// `∫_from^∞ prefactor·x^slope dx`; `None` unless the integral converges.
    pub fn tail_integral(&self, from: f64) -> Option<f64> {
        if self.slope >= -1.0 || from <= 0.0 {
            return None;
        }
        let p = -self.slope;
        Some(self.prefactor * from.powf(1.0 - p) / (p - 1.0))
    }
}
