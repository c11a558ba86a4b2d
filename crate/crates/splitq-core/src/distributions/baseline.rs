use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_positive, check_probability, DistributionError};

/// Exponential strength law used by the staircase and CRM baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExponential")]
pub struct ExponentialParams {
    lambda: f64,
}

#[derive(Deserialize)]
struct RawExponential {
    lambda: f64,
}

impl TryFrom<RawExponential> for ExponentialParams {
    type Error = DistributionError;
    fn try_from(raw: RawExponential) -> Result<Self, Self::Error> {
        ExponentialParams::new(raw.lambda)
    }
}

impl ExponentialParams {
    pub fn new(lambda: f64) -> Result<Self, DistributionError> {
        check_positive("lambda", lambda)?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.lambda * x).exp_m1()
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64, DistributionError> {
        check_probability("q", q)?;
        Ok(-(-q).ln_1p() / self.lambda)
    }
}

/// Gaussian strength law used by the staircase baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian")]
pub struct GaussianParams {
    mu: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawGaussian {
    mu: f64,
    sigma: f64,
}

impl TryFrom<RawGaussian> for GaussianParams {
    type Error = DistributionError;
    fn try_from(raw: RawGaussian) -> Result<Self, Self::Error> {
        GaussianParams::new(raw.mu, raw.sigma)
    }
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, DistributionError> {
        if !mu.is_finite() {
            return Err(DistributionError::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "must be finite",
            });
        }
        check_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn normal(&self) -> Normal {
        Normal::new(self.mu, self.sigma).expect("validated at construction")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.normal().cdf(x)
    }

    pub fn quantile(&self, q: f64) -> Result<f64, DistributionError> {
        check_probability("q", q)?;
        Ok(self.normal().inverse_cdf(q))
    }
}
