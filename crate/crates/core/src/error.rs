use thiserror::Error;

/// Failure modes shared by every crate of the workspace.
///
/// The variants line up with the command-line exit-code contract: usage,
/// domain, plan, configuration and spectrum-position errors are caller
/// mistakes (exit 2); singularities and numeric failures are computational
/// (exit 4).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("plan rejected: {0}")]
    Plan(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A jet division hit a vanishing constant term. At the engine level this
    /// means the base point sits on (or numerically at) a pole of a
    /// Birman-Schwinger inverse, i.e. an eigenvalue.
    #[error("singular division at base point {base_point}{}", fmt_mode(.mode))]
    Singularity {
        base_point: f64,
        mode: Option<usize>,
    },

    /// The spectral parameter is not below the spectrum of the interacting
    /// operator: `1 - strength * M` is non-positive in the given mode.
    #[error(
        "lambda = {lambda} is not below the spectrum (denominator {denominator:.3e} in mode {mode}); \
         use `eigs` to locate the bound states"
    )]
    AboveSpectrum {
        lambda: f64,
        mode: usize,
        denominator: f64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

fn fmt_mode(mode: &Option<usize>) -> String {
    match mode {
        Some(m) => format!(" (mode {m})"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a mode index to a singularity raised deep inside jet arithmetic.
    pub fn in_mode(self, index: usize) -> Self {
        match self {
            Error::Singularity { base_point, .. } => Error::Singularity {
                base_point,
                mode: Some(index),
            },
            Error::Numeric(msg) => Error::Numeric(format!("{msg} (mode {index})")),
            other => other,
        }
    }

    /// True for errors caused by the request rather than by the computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_)
                | Error::Domain(_)
                | Error::Plan(_)
                | Error::Config(_)
                | Error::AboveSpectrum { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
