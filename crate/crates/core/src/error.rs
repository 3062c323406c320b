use std::fmt;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction has norm {norm}, which deviates from 1 by more than 1e-6")]
    NotUnit { norm: f64 },

    #[error("function is not even: odd part has relative L2 norm {0:.3e}")]
    NotEven(f64),

    #[error("odd degree {0}: the spherical Radon transform annihilates odd harmonics")]
    OddDegree(usize),

    #[error("ill-conditioned inversion: multiplier for degree {degree} is {value:.3e}")]
    IllConditioned { degree: usize, value: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("density vanishes at t = {t} along direction {theta:?}")]
    ZeroDensity { theta: Vec<f64>, t: f64 },

    #[error(
        "not a section profile of any body: recovered radial integral {value:.3e} at node {node}"
    )]
    NotASectionProfile { node: usize, value: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("kernel is positive definite (min of its transform {min_value:.6e} >= -{tolerance:.3e}); no counterexample exists")]
    PositiveDefiniteKernel { min_value: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_finite(value: f64, context: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}

/// Non-fatal diagnostics attached to results so that verdicts stay auditable.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The top retained degree carries more than 1% of the coefficient mass.
    Truncation { degree: usize, mass_fraction: f64 },
    /// Odd part of an input that should be even is above 1e-8 but tolerated.
    OddResidual { relative: f64 },
    /// Free-form note.
    Note { message: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Truncation {
                degree,
                mass_fraction,
            } => write!(
                f,
                "truncation: degree {degree} carries {:.2}% of coefficient mass",
                100.0 * mass_fraction
            ),
            Warning::OddResidual { relative } => {
                write!(f, "odd residual {relative:.3e} relative to the L2 norm")
            }
            Warning::Note { message } => f.write_str(message),
        }
    }
}
