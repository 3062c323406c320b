//! Exit codes.

use std::fmt;

use sectio::Error;

pub const SUCCESS: i32 = 0;
pub const CONFIG: i32 = 2;
pub const NUMERICAL: i32 = 3;
pub const REFUSED: i32 = 4;

/// Malformed or inconsistent configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

/// A run that completed but did not reach its target.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical failure: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}
impl std::error::Error for NumericalFailure {}

pub fn code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return CONFIG;
        }
        if cause.is::<NumericalFailure>() {
            return NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::PositiveDefiniteKernel { .. } => REFUSED,
                Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::NotUnit { .. }
                | Error::Parse(_)
                | Error::Io(_) => CONFIG,
                _ => NUMERICAL,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return CONFIG;
        }
    }
    NUMERICAL
}
