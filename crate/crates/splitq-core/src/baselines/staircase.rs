use serde::{Deserialize, Serialize};

use super::{BaselineError, LevelOracle};
use crate::distributions::{ExponentialParams, GaussianParams};
use crate::estimators::{derivative_free_minimize, SearchBox, PROB_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaircaseModel {
    Exponential,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseConfig {
    pub s_ini: f64,
    pub delta: f64,
    pub k: usize,
    pub model: StaircaseModel,
}

impl StaircaseConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(BaselineError::InvalidConfig(format!("delta = {} must be > 0", self.delta)));
        }
        if self.k < 2 {
            return Err(BaselineError::InvalidConfig(format!("K = {} must be at least 2", self.k)));
        }
        if !self.s_ini.is_finite() {
            return Err(BaselineError::InvalidConfig("s_ini must be finite".into()));
        }
        Ok(())
    }
}

/// Tested levels and outcomes (1 = failure) in trial order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseRun {
    pub levels: Vec<f64>,
    pub outcomes: Vec<u8>,
    /// Level the next specimen would see.
    pub next_level: f64,
}

/// The up-and-down walk implied by `outcomes`, including the level after the
/// last trial.
pub fn staircase_walk(s_ini: f64, delta: f64, outcomes: &[u8]) -> Vec<f64> {
    let mut steps = 0i64;
    let mut levels = vec![s_ini];
    for &y in outcomes {
        steps += if y == 1 { -1 } else { 1 };
        levels.push(s_ini + steps as f64 * delta);
    }
    levels
}

pub fn staircase_run(config: &StaircaseConfig, oracle: &mut dyn LevelOracle) -> Result<StaircaseRun, BaselineError> {
    config.validate()?;
    let mut outcomes = Vec::with_capacity(config.k);
    let mut level = config.s_ini;
    let mut steps = 0i64;
    let mut levels = Vec::with_capacity(config.k);
    for _ in 0..config.k {
        levels.push(level);
        let y = oracle.trial(level);
        outcomes.push(y);
        steps += if y == 1 { -1 } else { 1 };
        level = config.s_ini + steps as f64 * config.delta;
    }
    Ok(StaircaseRun {
        levels,
        outcomes,
        next_level: level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum StaircaseEstimate {
    Exponential {
        lambda: f64,
        log_likelihood: f64,
        separated: bool,
    },
    Gaussian {
        mu: f64,
        sigma: f64,
        log_likelihood: f64,
        separated: bool,
    },
}

impl StaircaseEstimate {
    pub fn separated(&self) -> bool {
        match self {
            Self::Exponential { separated, .. } | Self::Gaussian { separated, .. } => *separated,
        }
    }

    /// Lower α-quantile of R under the fitted law.
    pub fn quantile(&self, alpha: f64) -> Result<f64, BaselineError> {
        Ok(match *self {
            Self::Exponential { lambda, .. } => ExponentialParams::new(lambda)?.quantile(alpha)?,
            Self::Gaussian { mu, sigma, .. } => GaussianParams::new(mu, sigma)?.quantile(alpha)?,
        })
    }
}

fn bernoulli_loglik(levels: &[f64], outcomes: &[u8], cdf: impl Fn(f64) -> f64) -> f64 {
    levels
        .iter()
        .zip(outcomes)
        .map(|(&s, &y)| {
            let phi = cdf(s).clamp(PROB_EPS, 1.0 - PROB_EPS);
            if y == 1 {
                phi.ln()
            } else {
                (1.0 - phi).ln()
            }
        })
        .sum()
}

/// Maximum likelihood for φ(s, θ) from the staircase record. Perfect
/// separation of failure and survival levels is flagged and yields the
/// boundary of the search box.
pub fn staircase_mle(levels: &[f64], outcomes: &[u8], model: StaircaseModel) -> Result<StaircaseEstimate, BaselineError> {
    if levels.len() != outcomes.len() || levels.is_empty() {
        return Err(BaselineError::InsufficientData(format!(
            "{} levels for {} outcomes",
            levels.len(),
            outcomes.len()
        )));
    }
    let fail_min = levels.iter().zip(outcomes).filter(|(_, &y)| y == 1).map(|(&s, _)| s).fold(f64::INFINITY, f64::min);
    let surv_max = levels.iter().zip(outcomes).filter(|(_, &y)| y == 0).map(|(&s, _)| s).fold(f64::NEG_INFINITY, f64::max);
    if fail_min.is_infinite() || surv_max.is_infinite() {
        return Err(BaselineError::InsufficientData("needs at least one failure and one survival".into()));
    }
    let separated = surv_max < fail_min;
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-8 * hi.abs().max(1.0));

    match model {
        StaircaseModel::Exponential => {
            let scale = levels.iter().map(|s| s.abs()).fold(0.0, f64::max).max(1e-300);
            let bounds = SearchBox::new(vec![(1e-6 / scale).ln()], vec![(1e3 / scale).ln()])?;
            let nll = |x: &[f64]| {
                let lambda = x[0].exp();
                -bernoulli_loglik(levels, outcomes, |s| if s <= 0.0 { 0.0 } else { -(-lambda * s).exp_m1() })
            };
            let start = vec![(1.0 / scale.max(surv_max.abs())).ln().clamp(bounds.lo[0], bounds.hi[0])];
            let min = derivative_free_minimize(nll, |_| true, &bounds, 400, 0, &[start])?;
            Ok(StaircaseEstimate::Exponential {
                lambda: min.point[0].exp(),
                log_likelihood: -min.value,
                separated,
            })
        }
        StaircaseModel::Gaussian => {
            let bounds = SearchBox::new(
                vec![lo - 5.0 * span, (span * 1e-3).ln()],
                vec![hi + 5.0 * span, (span * 1e2).ln()],
            )?;
            let nll = |x: &[f64]| {
                let (mu, sigma) = (x[0], x[1].exp());
                -bernoulli_loglik(levels, outcomes, |s| {
                    0.5 * statrs::function::erf::erfc(-(s - mu) / (sigma * std::f64::consts::SQRT_2))
                })
            };
            let mean = levels.iter().sum::<f64>() / levels.len() as f64;
            let start = vec![mean, (span / 4.0).ln()];
            let min = derivative_free_minimize(nll, |_| true, &bounds, 800, 0, &[start])?;
            Ok(StaircaseEstimate::Gaussian {
                mu: min.point[0],
                sigma: min.point[1].exp(),
                log_likelihood: -min.value,
                separated,
            })
        }
    }
}
