//! Comparison procedures: the up-and-down staircase, the continual
//! reassessment method on an exponential working model, and de Valk's
//! complete-data extreme-quantile estimator.

mod crm;
mod devalk;
mod staircase;

pub use crm::{crm_run, CrmConfig, CrmIteration, CrmRun, RateLevel};
pub use devalk::{
    devalk_h, devalk_quantile, devalk_theta_sum, hill_slope, weibull_tail_coefficient, DeValkConfig, Slope,
};
pub use staircase::{
    staircase_mle, staircase_run, staircase_walk, StaircaseConfig, StaircaseEstimate, StaircaseModel, StaircaseRun,
};

use thiserror::Error;

use crate::distributions::DistributionError;
use crate::estimators::OptimError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-positive order statistic {value} under a log-scale estimator")]
    NonPositiveOrderStatistic { value: f64 },
    #[error(transparent)]
    Search(#[from] OptimError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Source of single binary trials at a stress level: 1 on failure.
pub trait LevelOracle {
    fn trial(&mut self, level: f64) -> u8;

    fn trials(&mut self, level: f64, count: usize) -> Vec<u8> {
        (0..count).map(|_| self.trial(level)).collect()
    }
}

impl<F: FnMut(f64) -> u8> LevelOracle for F {
    fn trial(&mut self, level: f64) -> u8 {
        self(level)
    }
}
