//! Football match and tournament forecasting with a nested zero-inflated
//! generalized Poisson (ZIGP) model.
//!
//! The pipeline: replay Elo ratings over a match history, weight matches by
//! age and importance, fit per-team attack/defense/nested ZIGP regressions,
//! forecast single matches as score grids, and simulate a whole tournament
//! many times.
//!
//! Distribution, rating and scoring code is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix it to `f64`.

pub mod data_io;
pub mod elo;
pub mod error;
pub mod forecast;
pub mod metrics;
pub mod regression;
pub mod scalar;
pub mod synthetic;
pub mod tournament;
pub mod weights;
pub mod zigp;

pub use error::{Error, ErrorClass};
pub use scalar::Scalar;

/// Package version written into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Zigp = zigp::ZigpParams<f64>;
pub type Zigp32 = zigp::ZigpParams<f32>;
pub type OutcomeDistribution = metrics::OutcomeDistribution<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type TeamScore = metrics::TeamScore<f64>;
