use rand::{Rng, RngCore};
use rand_distr::Beta;
use serde::{Deserialize, Serialize};

use super::{BaselineError, LevelOracle};

/// Level whose failure probability the Beta law describes when the rate is
/// recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateLevel {
    /// The first selected level s*₁, kept for all iterations.
    First,
    /// The level tested at the current iteration.
    #[default]
    Latest,
}

fn default_prior_k() -> u64 {
    2
}
fn default_prior_n() -> u64 {
    10
}
fn default_draws() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrmConfig {
    /// Grid s₁ < … < s_J.
    pub levels: Vec<f64>,
    #[serde(default = "default_prior_k")]
    pub prior_k: u64,
    #[serde(default = "default_prior_n")]
    pub prior_n: u64,
    #[serde(default = "default_draws")]
    pub draws_l: usize,
    pub iterations_n: usize,
    pub trials_per_iter: usize,
    pub alpha_target: f64,
    /// Level the prior statement "k failures out of n" refers to; the middle
    /// grid level when absent.
    #[serde(default)]
    pub prior_level: Option<f64>,
    #[serde(default)]
    pub rate_level: RateLevel,
}

impl CrmConfig {
    pub fn equally_spaced(lo: f64, hi: f64, j: usize) -> Vec<f64> {
        if j == 1 {
            return vec![lo];
        }
        (0..j).map(|i| lo + (hi - lo) * i as f64 / (j - 1) as f64).collect()
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: String| Err(BaselineError::InvalidConfig(m));
        if self.levels.is_empty() || self.levels.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("levels must be non-empty and strictly increasing".into());
        }
        if self.levels[0] <= 0.0 || !self.levels.iter().all(|s| s.is_finite()) {
            return bad("levels must be finite and positive".into());
        }
        if !(1 <= self.prior_k && self.prior_k <= self.prior_n) {
            return bad(format!("need 1 <= k = {} <= n = {}", self.prior_k, self.prior_n));
        }
        if self.draws_l == 0 {
            return bad("draws_l must be at least 1".into());
        }
        if self.trials_per_iter == 0 || self.iterations_n == 0 {
            return bad("iterations and trials per iteration must be positive".into());
        }
        if !(self.alpha_target > 0.0 && self.alpha_target < 1.0) {
            return bad(format!("alpha_target = {} outside (0, 1)", self.alpha_target));
        }
        if let Some(s) = self.prior_level {
            if !(s > 0.0 && s.is_finite()) {
                return bad("prior_level must be positive".into());
            }
        }
        Ok(())
    }

    fn prior_level(&self) -> f64 {
        self.prior_level.unwrap_or(self.levels[self.levels.len() / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrmIteration {
    pub level: f64,
    pub trials: usize,
    pub failures: usize,
    /// Posterior Beta(a, b) after this iteration.
    pub post_a: u64,
    pub post_b: u64,
    pub lambda: f64,
    /// Batch with only failures or only survivals.
    pub no_diversity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrmRun {
    pub initial_lambda: f64,
    pub iterations: Vec<CrmIteration>,
    pub lambda: f64,
    /// Grid level selected for the next iteration.
    pub selected_level: f64,
}

impl CrmRun {
    /// Lower α-quantile of the fitted exponential law.
    pub fn quantile(&self, alpha: f64) -> f64 {
        -(-alpha).ln_1p() / self.lambda
    }
}

/// Monte Carlo mean of −log(1 − π)/s over `draws` Beta(a, b) variates.
fn rate_estimate(a: u64, b: u64, s: f64, draws: usize, rng: &mut dyn RngCore) -> Result<f64, BaselineError> {
    let beta = Beta::new(a as f64, b as f64).map_err(|e| BaselineError::InvalidConfig(e.to_string()))?;
    let total: f64 = (0..draws).map(|_| -(-rng.sample(beta)).ln_1p()).sum();
    Ok(total / (draws as f64 * s))
}

/// arginf over the grid of |1 − exp(−Λ s_j) − α|; ties go to the lower level.
fn select_level(levels: &[f64], lambda: f64, alpha: f64) -> f64 {
    let mut best = (f64::INFINITY, levels[0]);
    for &s in levels {
        let d = (-(-lambda * s).exp_m1() - alpha).abs();
        if d < best.0 {
            best = (d, s);
        }
    }
    best.1
}

/// Exponential-model CRM with Beta prior Beta(k, n−k+1) on the failure
/// probability and conjugate updates from the cumulated failures.
pub fn crm_run(config: &CrmConfig, oracle: &mut dyn LevelOracle, rng: &mut dyn RngCore) -> Result<CrmRun, BaselineError> {
    config.validate()?;
    let (k, n) = (config.prior_k, config.prior_n);
    let initial_lambda = rate_estimate(k, n - k + 1, config.prior_level(), config.draws_l, rng)?;
    let mut lambda = initial_lambda;
    let mut level = select_level(&config.levels, lambda, config.alpha_target);
    let first_level = level;
    let mut failures_total = 0u64;
    let mut trials_total = 0u64;
    let mut iterations = Vec::with_capacity(config.iterations_n);
    for _ in 0..config.iterations_n {
        let y = oracle.trials(level, config.trials_per_iter);
        let failures = y.iter().filter(|&&v| v == 1).count();
        failures_total += failures as u64;
        trials_total += y.len() as u64;
        let a = k + failures_total;
        let b = n + trials_total - a + 1;
        let s = match config.rate_level {
            RateLevel::First => first_level,
            RateLevel::Latest => level,
        };
        lambda = rate_estimate(a, b, s, config.draws_l, rng)?;
        iterations.push(CrmIteration {
            level,
            trials: y.len(),
            failures,
            post_a: a,
            post_b: b,
            lambda,
            no_diversity: failures == 0 || failures == y.len(),
        });
        level = select_level(&config.levels, lambda, config.alpha_target);
    }
    Ok(CrmRun {
        initial_lambda,
        iterations,
        lambda,
        selected_level: level,
    })
}
