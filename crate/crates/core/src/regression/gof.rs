//! Pearson chi-square goodness of fit for a fitted ZIGP regression.

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{FitObservation, RegressionCoefficients};

/// Means below this are floored before dividing.
pub const MEAN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub n: usize,
}

/// `sum (x_i - m_i)^2 / m_i` with `m_i` floored at [`MEAN_FLOOR`]. Returns the
/// statistic and how many means were floored.
pub fn pearson_statistic(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, usize) {
    let mut floored = 0;
    let stat = pairs
        .into_iter()
        .map(|(x, m)| {
            let m = if m <= MEAN_FLOOR {
                floored += 1;
                MEAN_FLOOR
            } else {
                m
            };
            (x - m) * (x - m) / m
        })
        .sum();
    (stat, floored)
}

/// Upper tail `P[chi2_df >= statistic]`.
pub fn chi_square_p_value(statistic: f64, df: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df.max(1) as f64).expect("positive degrees of freedom");
    dist.sf(statistic).clamp(0.0, 1.0)
}

/// Goodness of fit of `coef` on `obs`. The fitted mean is the ZIGP mean
/// `(1 - omega) mu_i`; degrees of freedom are `n - p` (alpha coefficients
/// only), clamped to at least one.
pub fn chi_square_gof(obs: &[FitObservation], coef: &RegressionCoefficients) -> GofResult {
    let inflation = 1.0 - coef.omega();
    let (statistic, floored) =
        pearson_statistic(obs.iter().map(|o| (o.response as f64, inflation * coef.intensity(&o.covariates))));
    if floored > 0 {
        warn!("{floored} fitted means floored at {MEAN_FLOOR:e} in chi-square statistic");
    }
    let df = obs.len().saturating_sub(coef.alpha.len()).max(1);
    GofResult { statistic, df, p_value: chi_square_p_value(statistic, df), n: obs.len() }
}
