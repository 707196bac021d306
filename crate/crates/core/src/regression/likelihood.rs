//! Weighted ZIGP log-likelihood with analytic gradient.
//!
//! Parameter vector layout: `[alpha_0, .., alpha_{p-1}, beta, gamma_log]` with
//! `log mu_i = x_i . alpha`, `phi = 1 + exp(beta)`, `omega = logistic(gamma_log)`.

use statrs::function::factorial::ln_factorial;

use super::FitObservation;

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Log-pmf of one observation and its partials with respect to the linear
/// predictor `eta`, `beta` and `gamma_log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTerms {
    pub log_p: f64,
    pub d_eta: f64,
    pub d_beta: f64,
    pub d_gamma: f64,
}

pub fn point_terms(k: u32, eta: f64, beta: f64, gamma_log: f64) -> PointTerms {
    let mu = eta.exp();
    let phi_m1 = beta.exp();
    let phi = 1.0 + phi_m1;
    let omega = logistic(gamma_log);
    let log_one_minus_omega = -softplus(gamma_log);

    if k == 0 {
        let log_omega = -softplus(-gamma_log);
        let ratio = mu / phi;
        let log_gp_zero = log_one_minus_omega - ratio;
        let log_p = log_add_exp(log_omega, log_gp_zero);
        // share of P[X=0] coming from the generalized Poisson part
        let r = (log_gp_zero - log_p).exp();
        let q = (log_omega - log_p).exp();
        PointTerms {
            log_p,
            d_eta: -ratio * r,
            d_beta: r * mu * phi_m1 / (phi * phi),
            d_gamma: q * (1.0 - omega) * -(-ratio).exp_m1(),
        }
    } else {
        let kf = k as f64;
        let lambda = mu + phi_m1 * kf;
        let (log_lambda_term, d_lambda_term) = if k > 1 {
            ((kf - 1.0) * lambda.ln(), (kf - 1.0) * mu / lambda)
        } else {
            (0.0, 0.0)
        };
        let log_p = log_one_minus_omega + eta + log_lambda_term
            - ln_factorial(k as u64)
            - kf * phi.ln()
            - lambda / phi;
        let d_phi = if k > 1 { kf * (kf - 1.0) / lambda } else { 0.0 } - 2.0 * kf / phi + lambda / (phi * phi);
        PointTerms {
            log_p,
            d_eta: 1.0 + d_lambda_term - mu / phi,
            d_beta: d_phi * phi_m1,
            d_gamma: -omega,
        }
    }
}

/// `L(theta) = sum_i w_i log P[X = x_i | theta]`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedLikelihood<'a> {
    obs: &'a [FitObservation],
    dim: usize,
}

impl<'a> WeightedLikelihood<'a> {
    /// All observations must carry the same covariate dimension.
    pub fn new(obs: &'a [FitObservation]) -> Self {
        let dim = obs.first().map_or(0, |o| o.covariates.len());
        debug_assert!(obs.iter().all(|o| o.covariates.len() == dim));
        Self { obs, dim }
    }

    pub fn n_alpha(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.dim + 2
    }

    pub fn total_weight(&self) -> f64 {
        self.obs.iter().map(|o| o.weight).sum()
    }

    fn eta(&self, o: &FitObservation, theta: &[f64]) -> f64 {
        o.covariates.iter().zip(theta).map(|(x, a)| x * a).sum()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let (beta, gamma) = (theta[self.dim], theta[self.dim + 1]);
        self.obs
            .iter()
            .map(|o| o.weight * point_terms(o.response, self.eta(o, theta), beta, gamma).log_p)
            .sum()
    }

    /// Writes `dL/dtheta` into `grad` and returns `L(theta)`.
    pub fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(grad.len(), self.n_params());
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (beta, gamma) = (theta[self.dim], theta[self.dim + 1]);
        let mut total = 0.0;
        for o in self.obs {
            let t = point_terms(o.response, self.eta(o, theta), beta, gamma);
            total += o.weight * t.log_p;
            for (g, x) in grad.iter_mut().zip(&o.covariates) {
                *g += o.weight * t.d_eta * x;
            }
            grad[self.dim] += o.weight * t.d_beta;
            grad[self.dim + 1] += o.weight * t.d_gamma;
        }
        total
    }
}
