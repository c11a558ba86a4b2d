//! Parameter estimation from binary exceedance batches: maximum likelihood,
//! minimum-divergence fits and the enhanced sequential criterion, all driven
//! by a bounded derivative-free search.

mod divergence;
mod enhanced;
mod mle;
mod optimizer;
mod registry;

pub use divergence::{divergence, divergence_fit, DivergenceEstimator, DivergenceKind};
pub use enhanced::{enhanced_fit, EnhancedEstimator};
pub use mle::{mle_fit, MleEstimator};
pub use optimizer::{derivative_free_minimize, Minimum, OptimError, SearchBox};
pub use registry::{EstimatorRegistry, FixedEstimator};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::distributions::{DistributionError, ModelKind, TailParams};

/// Clamp applied to model probabilities inside logarithms.
pub const PROB_EPS: f64 = 1e-12;

/// One stage's trial record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryBatch {
    pub s_prev: f64,
    pub s_curr: f64,
    pub k: usize,
    pub failures: usize,
}

impl BinaryBatch {
    pub fn new(s_prev: f64, s_curr: f64, k: usize, failures: usize) -> Result<Self, EstimateError> {
        if k == 0 || failures > k {
            return Err(EstimateError::InvalidBatch(format!("failures {failures} of K = {k}")));
        }
        if !(s_prev >= 0.0 && s_curr > s_prev && s_curr.is_finite()) {
            return Err(EstimateError::InvalidBatch(format!("levels {s_prev} -> {s_curr} not increasing")));
        }
        Ok(Self { s_prev, s_curr, k, failures })
    }

    pub fn from_outcomes(s_prev: f64, s_curr: f64, outcomes: &[u8]) -> Result<Self, EstimateError> {
        if let Some(bad) = outcomes.iter().find(|&&y| y > 1) {
            return Err(EstimateError::InvalidBatch(format!("outcome {bad} is not 0/1")));
        }
        let failures = outcomes.iter().filter(|&&y| y == 1).count();
        Self::new(s_prev, s_curr, outcomes.len(), failures)
    }

    pub fn phat(&self) -> f64 {
        phat(self)
    }

    pub fn is_degenerate(&self) -> bool {
        self.failures == 0 || self.failures == self.k
    }

    /// Model probability of exceeding `s_curr` given `s_prev`.
    pub fn model_prob(&self, params: &TailParams) -> f64 {
        params.conditional_survival(self.s_prev, self.s_curr)
    }
}

/// Ordered batches of one ladder.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryDataset {
    pub batches: Vec<BinaryBatch>,
}

impl BinaryDataset {
    pub fn new(batches: Vec<BinaryBatch>) -> Result<Self, EstimateError> {
        for w in batches.windows(2) {
            if !(w[1].s_curr > w[0].s_curr) {
                return Err(EstimateError::InvalidBatch("batch levels must increase".into()));
            }
        }
        Ok(Self { batches })
    }

    pub fn latest(&self) -> Option<&BinaryBatch> {
        self.batches.last()
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn total_trials(&self) -> usize {
        self.batches.iter().map(|b| b.k).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("non-identifiable: every batch is degenerate (0 or K failures)")]
    NonIdentifiable,
    #[error("estimator {estimator} needs at least {needed} batches, got {got}")]
    InsufficientData {
        estimator: String,
        needed: usize,
        got: usize,
    },
    #[error("search failed: {0}")]
    Search(#[from] OptimError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("unknown estimator {0:?}")]
    UnknownEstimator(String),
    #[error("{0}")]
    Failed(String),
}

/// Empirical exceedance frequency failures/K.
pub fn phat(batch: &BinaryBatch) -> f64 {
    batch.failures as f64 / batch.k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Distance from `x` to the interval, zero inside.
    pub fn violation(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// Normal-approximation interval p̂ ± z_{1−γ/2}·√(p̂(1−p̂)/(K−1)), clipped to [0, 1].
pub fn confidence_interval_p(batch: &BinaryBatch, gamma: f64) -> Interval {
    let p = phat(batch);
    if batch.k < 2 || !(gamma > 0.0 && gamma < 1.0) {
        return Interval { lo: p, hi: p };
    }
    let z = Normal::standard().inverse_cdf(1.0 - gamma / 2.0);
    let half = z * (p * (1.0 - p) / (batch.k as f64 - 1.0)).sqrt();
    Interval {
        lo: (p - half).max(0.0),
        hi: (p + half).min(1.0),
    }
}

pub fn in_plausible_set(params: &TailParams, batch: &BinaryBatch, interval: &Interval) -> bool {
    interval.contains(batch.model_prob(params))
}

/// |(s_jm1 − s_jm2) − G⁻¹_{cond at s_jm2}(1 − p̂)|, the quantile-scale backward inconsistency.
pub fn backward_residual(params: &TailParams, s_jm1: f64, s_jm2: f64, phat_prev: f64) -> f64 {
    let gap = params.conditional_gap_quantile(s_jm2, 1.0 - phat_prev);
    ((s_jm1 - s_jm2) - gap).abs()
}

/// |P_model(R̃ > s_jm1 | R̃ > s_jm2) − p̂|, the probability-scale counterpart.
pub fn probability_residual(params: &TailParams, s_jm1: f64, s_jm2: f64, phat_prev: f64) -> f64 {
    (params.conditional_survival(s_jm2, s_jm1) - phat_prev).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    /// Some model probability hit the [ε, 1−ε] clamp.
    pub clamped: bool,
}

/// Σ f·log π + (K−f)·log(1−π) over batches.
pub fn binary_loglik(params: &TailParams, data: &BinaryDataset) -> LogLikelihood {
    let mut value = 0.0;
    let mut clamped = false;
    for b in &data.batches {
        let raw = b.model_prob(params);
        let pi = raw.clamp(PROB_EPS, 1.0 - PROB_EPS);
        clamped |= pi != raw;
        let f = b.failures as f64;
        let s = (b.k - b.failures) as f64;
        if f > 0.0 {
            value += f * pi.ln();
        }
        if s > 0.0 {
            value += s * (-pi).ln_1p();
        }
    }
    LogLikelihood { value, clamped }
}

/// Which previous stage pairs enter the backward residual.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    #[default]
    All,
    Latest,
}

/// Weighted squared distance in search coordinates used to pick among
/// near-equivalent parameters: `weight·(shape_weight·Δshape² + Δlog-scale²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Proximity {
    pub weight: f64,
    pub shape_weight: f64,
}

impl Default for Proximity {
    fn default() -> Self {
        Self {
            weight: 1e-3,
            shape_weight: 1.0,
        }
    }
}

impl Proximity {
    pub fn penalty(&self, x: &[f64], anchor: &[f64]) -> f64 {
        let ds = x[0] - anchor[0];
        let dl = x[1] - anchor[1];
        self.weight * (self.shape_weight * ds * ds + dl * dl)
    }
}

/// Everything a fit needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct FitContext {
    pub model: ModelKind,
    /// Warm start; also the anchor of the proximity term.
    pub init: TailParams,
    pub bounds: Option<SearchBox>,
    pub gamma: f64,
    pub budget: usize,
    pub seed: u64,
    pub pair_mode: PairMode,
    pub proximity: Proximity,
}

impl FitContext {
    pub fn new(init: TailParams) -> Self {
        Self {
            model: init.kind(),
            init,
            bounds: None,
            gamma: 0.05,
            budget: 2000,
            seed: 0,
            pair_mode: PairMode::All,
            proximity: Proximity::default(),
        }
    }

    pub fn search_box(&self, data: &BinaryDataset) -> SearchBox {
        self.bounds
            .clone()
            .unwrap_or_else(|| SearchBox::default_for(self.model, data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Data criterion at the optimum (negative log-likelihood, summed
    /// divergence, or summed backward residual); always ≥ 0.
    pub criterion: f64,
    pub evaluations: usize,
    pub interval: Option<Interval>,
    pub flat: bool,
    #[serde(default)]
    pub relaxed: bool,
    #[serde(default)]
    pub clamped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub params: TailParams,
    pub diagnostics: FitDiagnostics,
}

/// A named fitting strategy.
pub trait Estimator: Send + Sync {
    fn name(&self) -> &str;

    /// Batches required before this estimator applies; the splitting driver
    /// falls back to maximum likelihood below it.
    fn min_batches(&self) -> usize {
        1
    }

    fn fit(&self, data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError>;
}

/// Solve `min criterion/scale + proximity` over the box; shared by every
/// built-in estimator.
pub(crate) struct Problem<'a> {
    pub criterion: &'a dyn Fn(&TailParams) -> f64,
    pub feasible: &'a dyn Fn(&TailParams) -> bool,
    pub scale: f64,
    /// Scaled-criterion distance from the best sample counted as "flat".
    pub flat_tolerance: f64,
}

pub(crate) struct Solution {
    pub params: TailParams,
    pub criterion: f64,
    pub evaluations: usize,
    pub flat: bool,
}

pub(crate) fn solve(problem: &Problem<'_>, data: &BinaryDataset, ctx: &FitContext) -> Result<Solution, EstimateError> {
    let bounds = ctx.search_box(data);
    let anchor = bounds.clamp(&ctx.init.to_search());
    let model = ctx.model;
    let decode = |x: &[f64]| TailParams::from_search(model, x).ok();
    let mut sampled: Vec<f64> = Vec::new();
    let objective = |x: &[f64]| match decode(x) {
        Some(p) => {
            let v = (problem.criterion)(&p) / problem.scale;
            if v.is_finite() {
                sampled.push(v);
            }
            v + ctx.proximity.penalty(x, &anchor)
        }
        None => f64::INFINITY,
    };
    let feasible = |x: &[f64]| decode(x).is_some_and(|p| (problem.feasible)(&p));
    let min = derivative_free_minimize(objective, feasible, &bounds, ctx.budget, ctx.seed, &[anchor.to_vec()])?;
    let params = TailParams::from_search(model, &min.point)?;
    let criterion = (problem.criterion)(&params).max(0.0);
    let best = criterion / problem.scale;
    let n = sampled.len().max(1);
    let near = sampled.iter().filter(|&&v| v <= best + problem.flat_tolerance).count();
    Ok(Solution {
        params,
        criterion,
        evaluations: min.evaluations,
        flat: near as f64 / n as f64 > 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(k: usize, f: usize) -> BinaryBatch {
        BinaryBatch::new(0.0, 1.0, k, f).unwrap()
    }

    #[test]
    fn phat_examples() {
        assert_eq!(phat(&batch(50, 10)), 0.2);
        assert_eq!(phat(&batch(50, 0)), 0.0);
    }

    #[test]
    fn interval_examples() {
        let i = confidence_interval_p(&batch(50, 10), 0.05);
        assert!((i.lo - 0.088).abs() < 1e-3 && (i.hi - 0.312).abs() < 1e-3, "{i:?}");
        let d = confidence_interval_p(&batch(50, 0), 0.05);
        assert!(d.is_degenerate() && d.lo == 0.0);
        let c = confidence_interval_p(&batch(50, 10), 1.0 - 1e-12);
        assert!((c.hi - c.lo) < 1e-9);
    }

    #[test]
    fn plausible_set_examples() {
        let p = TailParams::gpd(0.8, 1.5).unwrap();
        let s1 = p.quantile(0.8).unwrap();
        let b = BinaryBatch::new(0.0, s1, 50, 10).unwrap();
        let i = confidence_interval_p(&b, 0.05);
        assert!(in_plausible_set(&p, &b, &i));
        let far = TailParams::unit_shape_through(ModelKind::Gpd, s1, 0.9).unwrap();
        assert!(!in_plausible_set(&far, &b, &i));
        let edge = TailParams::unit_shape_through(ModelKind::Gpd, s1, 0.25).unwrap();
        let pi = b.model_prob(&edge);
        assert!(in_plausible_set(&edge, &b, &Interval { lo: 0.1, hi: pi }));
    }

    #[test]
    fn backward_residual_examples() {
        let p = TailParams::gpd(1.0, 1.0).unwrap();
        assert!((backward_residual(&p, 2.0, 1.0, 0.5) - 1.0).abs() < 1e-12);
        let exact = p.conditional_survival(1.0, 2.0);
        assert!(backward_residual(&p, 2.0, 1.0, exact) < 1e-10);
        let d = (backward_residual(&p, 2.0, 1.0, 0.5 + 1e-6) - 1.0).abs();
        assert!(d < 1e-3);
        assert!(probability_residual(&p, 2.0, 1.0, exact) < 1e-15);
    }

    #[test]
    fn loglik_examples() {
        let p = TailParams::gpd(0.8, 1.5).unwrap();
        let s1 = p.quantile(0.8).unwrap();
        let data = BinaryDataset::new(vec![BinaryBatch::new(0.0, s1, 50, 10).unwrap()]).unwrap();
        let ll = binary_loglik(&p, &data);
        assert!((ll.value - 50.0 * (0.2f64 * 0.2f64.ln() + 0.8 * 0.8f64.ln())).abs() < 1e-9);
        assert!((ll.value + 25.02).abs() < 0.01);
        assert!(!ll.clamped);
    }

    #[test]
    fn invalid_batches() {
        assert!(BinaryBatch::new(0.0, 1.0, 5, 6).is_err());
        assert!(BinaryBatch::new(2.0, 1.0, 5, 1).is_err());
        assert!(BinaryBatch::from_outcomes(0.0, 1.0, &[0, 2]).is_err());
        let b = BinaryBatch::from_outcomes(0.0, 1.0, &[0, 1, 1, 0]).unwrap();
        assert_eq!((b.k, b.failures), (4, 2));
    }
}
