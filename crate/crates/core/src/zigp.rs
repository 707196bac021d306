//! Zero-inflated generalized Poisson (ZIGP) distribution.
//!
//! A goal count `X` with intensity `mu > 0`, dispersion `phi >= 1` and
//! zero-inflation `omega` in `[0, 1)` has
//!
//! ```text
//! P[X = 0] = omega + (1 - omega) * exp(-mu / phi)
//! P[X = k] = (1 - omega) * mu * (mu + (phi - 1) k)^(k - 1) / k! * phi^(-k)
//!            * exp(-(mu + (phi - 1) k) / phi),            k >= 1
//! ```
//!
//! With `phi = 1` and `omega = 0` this is the Poisson distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::scalar::Scalar;

/// Hard upper bound on the support used for truncated normalization and sampling.
pub const MAX_SUPPORT: u32 = 200;

/// Probability mass allowed to fall beyond the truncation point.
pub const TAIL_MASS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ZigpError {
    #[error("ZIGP intensity mu must be positive and finite, got {0}")]
    Intensity(f64),
    #[error("ZIGP dispersion phi must be finite and >= 1, got {0}")]
    Dispersion(f64),
    #[error("ZIGP zero-inflation omega must lie in [0, 1), got {0}")]
    ZeroInflation(f64),
}

/// Validated `(mu, phi, omega)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams<T>", into = "RawParams<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ZigpParams<T> {
    mu: T,
    phi: T,
    omega: T,
}

#[derive(Serialize, Deserialize)]
struct RawParams<T> {
    mu: T,
    phi: T,
    omega: T,
}

impl<T: Scalar> TryFrom<RawParams<T>> for ZigpParams<T> {
    type Error = ZigpError;

    fn try_from(raw: RawParams<T>) -> Result<Self, Self::Error> {
        ZigpParams::new(raw.mu, raw.phi, raw.omega)
    }
}

impl<T: Scalar> From<ZigpParams<T>> for RawParams<T> {
    fn from(p: ZigpParams<T>) -> Self {
        RawParams { mu: p.mu, phi: p.phi, omega: p.omega }
    }
}

impl<T: Scalar> ZigpParams<T> {
    pub fn new(mu: T, phi: T, omega: T) -> Result<Self, ZigpError> {
        if !(mu.is_finite() && mu > T::zero()) {
            return Err(ZigpError::Intensity(mu.as_f64()));
        }
        if !(phi.is_finite() && phi >= T::one()) {
            return Err(ZigpError::Dispersion(phi.as_f64()));
        }
        if !(omega >= T::zero() && omega < T::one()) {
            return Err(ZigpError::ZeroInflation(omega.as_f64()));
        }
        Ok(Self { mu, phi, omega })
    }

    /// Plain Poisson distribution with mean `mu`.
    pub fn poisson(mu: T) -> Result<Self, ZigpError> {
        Self::new(mu, T::one(), T::zero())
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// Same dispersion and zero-inflation, intensity multiplied by `factor`.
    pub fn scale_intensity(&self, factor: T) -> Result<Self, ZigpError> {
        Self::new(self.mu * factor, self.phi, self.omega)
    }

    /// `E[X] = (1 - omega) mu`.
    pub fn mean(&self) -> T {
        (T::one() - self.omega) * self.mu
    }

    /// `Var[X] = (1 - omega) mu (phi^2 + omega mu)`.
    pub fn variance(&self) -> T {
        (T::one() - self.omega) * self.mu * (self.phi * self.phi + self.omega * self.mu)
    }

    pub fn log_pmf(&self, k: u32) -> T {
        let (mu, phi, omega) = (self.mu, self.phi, self.omega);
        if k == 0 {
            let no_inflation = -mu / phi;
            if omega == T::zero() {
                return no_inflation;
            }
            return (omega + (T::one() - omega) * no_inflation.exp()).ln();
        }
        let kf = T::lit(k as f64);
        let lambda = mu + (phi - T::one()) * kf;
        (T::one() - omega).ln() + mu.ln() + (kf - T::one()) * lambda.ln()
            - T::lit(ln_factorial(k as u64))
            - kf * phi.ln()
            - lambda / phi
    }

    pub fn pmf(&self, k: u32) -> T {
        if k == 0 {
            return self.omega + (T::one() - self.omega) * (-self.mu / self.phi).exp();
        }
        self.log_pmf(k).exp()
    }

    /// Smallest `k` whose cumulative mass reaches `1 - TAIL_MASS`, capped at
    /// [`MAX_SUPPORT`].
    pub fn support_cap(&self) -> u32 {
        let target = T::one() - T::lit(TAIL_MASS);
        let mut cum = T::zero();
        for k in 0..=MAX_SUPPORT {
            cum = cum + self.pmf(k);
            if cum >= target {
                return k;
            }
        }
        MAX_SUPPORT
    }

    /// pmf on `0..=support_cap()`, renormalized to sum to one.
    pub fn truncated_pmf(&self) -> Vec<T> {
        let cap = self.support_cap();
        let mut probs: Vec<T> = (0..=cap).map(|k| self.pmf(k)).collect();
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        for p in &mut probs {
            *p = *p / total;
        }
        probs
    }

    /// Inversion sample from the truncated, renormalized pmf.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u = T::lit(rng.random::<f64>());
        self.quantile(u)
    }

    /// Smallest `k` with truncated cdf `F(k) >= u`, for `u` in `[0, 1)`.
    pub fn quantile(&self, u: T) -> u32 {
        let target_mass = T::one() - T::lit(TAIL_MASS);
        // The renormalizing total lies in [target_mass, 1], so the scaled
        // threshold u * total lies in [u * target_mass, u].
        let lower = u * target_mass;
        let mut prev = T::zero();
        let mut cum = T::zero();
        for k in 0..=MAX_SUPPORT {
            cum = cum + self.pmf(k);
            if cum >= u {
                if k == 0 || prev < lower {
                    return k;
                }
                break;
            }
            if cum >= target_mass {
                break;
            }
            prev = cum;
        }
        self.quantile_exact(u)
    }

    fn quantile_exact(&self, u: T) -> u32 {
        let table = self.truncated_pmf();
        let mut cum = T::zero();
        for (k, p) in table.iter().enumerate() {
            cum = cum + *p;
            if cum >= u {
                return k as u32;
            }
        }
        (table.len() - 1) as u32
    }
}
