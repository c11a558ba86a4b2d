//! Closed-form laws on the inverted strength scale R̃ = 1/R, their
//! conditional versions, and the transform and mixture representations.

mod baseline;
mod gpd;
mod mixture;
mod tail;
mod transform;
mod weibull;

pub use baseline::{ExponentialParams, GaussianParams};
pub use gpd::{gpd_condition, gpd_quantile, gpd_survival, inverted_gpd_cdf, GpdParams};
pub use mixture::gamma_mixture_check;
pub use tail::{ModelKind, TailParams};
pub use transform::{completely_monotone_violation, transform_survival, GpdTransform, TransformKind};
pub use weibull::{weibull_conditional_survival, weibull_quantile, weibull_survival, WeibullParams};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("quadrature did not converge, achieved residual {residual:e}")]
    Quadrature { residual: f64 },
}

pub(crate) fn check_probability(what: &'static str, q: f64) -> Result<(), DistributionError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(DistributionError::Domain {
            what,
            value: q,
            domain: "(0, 1)",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), DistributionError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DistributionError::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
