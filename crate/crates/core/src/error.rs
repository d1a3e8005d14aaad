use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the model (non-positive frequency,
    /// unstable stiffness, bad oscillator index, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator produced a non-finite value.
    #[error("propagation failed at step {step} (t = {t}): {reason}")]
    Propagation { step: usize, t: f64, reason: String },

    /// A numerical kernel did not converge or received a singular input.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A symplectic eigenvalue fell below the uncertainty bound.
    #[error("uncertainty bound violated: symplectic eigenvalue {0} < 1/2")]
    UncertaintyViolation(f64),

    #[error("Ermakov solution hit gamma = {gamma} at t = {t}")]
    Singularity { t: f64, gamma: f64 },

    #[error("degenerate quench: eps_plus = {eps_plus} does not exceed |eps_minus| = {eps_minus_abs}")]
    DegenerateQuench { eps_plus: f64, eps_minus_abs: f64 },

    #[error("series has no detectable oscillation")]
    NoOscillation,

    #[error("R^2 undefined: series has zero total variance")]
    UndefinedRSquared,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("render error: {0}")]
    Render(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised by the numerical pipeline as opposed to
    /// configuration or I/O problems.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Propagation { .. }
                | Error::Numeric(_)
                | Error::UncertaintyViolation(_)
                | Error::Singularity { .. }
                | Error::DegenerateQuench { .. }
        )
    }
}
