//! Top-level error type and its mapping onto process exit codes.

use thiserror::Error;

use crate::data_io::DataError;
use crate::elo::EloError;
use crate::forecast::ForecastError;
use crate::metrics::MetricsError;
use crate::regression::{FitError, RegressionError};
use crate::tournament::TournamentError;
use crate::weights::WeightError;
use crate::zigp::ZigpError;

/// Broad failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, schema or input content.
    Config,
    /// Model fitting failed.
    Fit,
    /// A file could not be read or written.
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Fit => 3,
            ErrorClass::Io => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Elo(#[from] EloError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Zigp(#[from] ZigpError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Tournament(#[from] TournamentError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    /// One or more teams ended up without a usable model.
    #[error("no model for {} team(s): {}", .0.len(), .0.join(", "))]
    TeamsWithoutModel(Vec<String>),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Data(e) if e.is_io() => ErrorClass::Io,
            Error::Fit(_) | Error::TeamsWithoutModel(_) => ErrorClass::Fit,
            Error::Regression(RegressionError::Fit { .. }) => ErrorClass::Fit,
            _ => ErrorClass::Config,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn exit_codes() {
        let io = Error::Data(DataError::Read {
            path: PathBuf::from("x"),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        });
        assert_eq!(io.exit_code(), 4);
        assert_eq!(Error::TeamsWithoutModel(vec!["Wales".into()]).exit_code(), 3);
        assert_eq!(Error::Tournament(TournamentError::NoRuns).exit_code(), 2);
        assert_eq!(Error::Config("bad".into()).exit_code(), 2);
    }
}
