//! The splitting ladder: plan the stage count, query a trial oracle level by
//! level, refit the tail model after each batch and move to the (1−p)-quantile
//! of the fitted conditional law.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{gpd_condition, gpd_quantile, GpdParams, ModelKind, TailParams};
use crate::estimators::{
    BinaryBatch, BinaryDataset, EstimateError, Estimator, FitContext, FitDiagnostics, MleEstimator, PairMode,
    Proximity, SearchBox,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplittingError {
    #[error("invalid configuration: {}", .0.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<FieldError>),
    #[error("alpha = {alpha} must not exceed p = {p}")]
    Domain { alpha: f64, p: f64 },
    #[error("stage {stage}: expected {expected} outcomes, got {got}")]
    OutcomeCount { stage: usize, expected: usize, got: usize },
    #[error("stage {stage}: {message}")]
    InvalidOutcomes { stage: usize, message: String },
    #[error("ladder already complete")]
    Complete,
    #[error("ladder aborted: {0}")]
    Aborted(String),
    #[error("estimator failed at stage {stage}: {source}")]
    Estimator {
        stage: usize,
        source: EstimateError,
        ladder: Box<Ladder>,
    },
}

/// Search settings shared by every stage fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub budget: usize,
    pub pair_mode: PairMode,
    pub proximity: Proximity,
    pub bounds: Option<SearchBox>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            budget: 2000,
            pair_mode: PairMode::All,
            proximity: Proximity::default(),
            bounds: None,
        }
    }
}

fn default_gamma() -> f64 {
    0.05
}

/// Ladder settings, all levels on the inverted scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub alpha: f64,
    pub p: f64,
    /// Stage count; derived from (alpha, p) when absent.
    #[serde(default)]
    pub m: Option<usize>,
    /// First threshold s̃₁; the pilot's (1−p)-quantile when absent.
    #[serde(default)]
    pub s1: Option<f64>,
    pub k: usize,
    #[serde(default)]
    pub k_per_stage: Option<Vec<usize>>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Prior guess of the tail law; anchors the first fit.
    #[serde(default)]
    pub pilot: Option<TailParams>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub seed: u64,
}

impl LadderConfig {
    pub fn new(alpha: f64, p: f64, k: usize, s1: f64) -> Self {
        Self {
            alpha,
            p,
            m: None,
            s1: Some(s1),
            k,
            k_per_stage: None,
            gamma: default_gamma(),
            pilot: None,
            fit: FitOptions::default(),
            seed: 0,
        }
    }

    /// Every violated constraint, one entry per field.
    pub fn validate(&self, model: ModelKind) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            errs.push(FieldError::new("alpha", "must lie in (0, 1)"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            errs.push(FieldError::new("p", "must lie in (0, 1)"));
        } else if self.alpha > self.p {
            errs.push(FieldError::new("p", format!("must be at least alpha = {}", self.alpha)));
        }
        if self.k < 2 {
            errs.push(FieldError::new("k", "at least 2 trials per stage"));
        }
        if let Some(s1) = self.s1 {
            if !(s1 > 0.0 && s1.is_finite()) {
                errs.push(FieldError::new("s1", "must be finite and > 0"));
            }
        } else if self.pilot.is_none() {
            errs.push(FieldError::new("s1", "required when no pilot model is given"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            errs.push(FieldError::new("gamma", "must lie in (0, 1)"));
        }
        if self.m == Some(0) {
            errs.push(FieldError::new("m", "at least one stage"));
        }
        if let Some(pilot) = &self.pilot {
            if pilot.kind() != model {
                errs.push(FieldError::new("pilot", format!("pilot is {} but the model is {model}", pilot.kind())));
            }
        }
        if let Some(ks) = &self.k_per_stage {
            if ks.iter().any(|&k| k < 2) {
                errs.push(FieldError::new("k_per_stage", "at least 2 trials per stage"));
            }
            if errs.is_empty() {
                if let Ok(m) = self.stage_count() {
                    if ks.len() != m {
                        errs.push(FieldError::new("k_per_stage", format!("needs {m} entries, got {}", ks.len())));
                    }
                }
            }
        }
        if self.fit.budget == 0 {
            errs.push(FieldError::new("fit.budget", "at least one evaluation"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn stage_count(&self) -> Result<usize, SplittingError> {
        match self.m {
            Some(m) => Ok(m),
            None => plan_stage_count(self.alpha, self.p),
        }
    }

    pub fn trials_at(&self, stage: usize) -> usize {
        self.k_per_stage
            .as_ref()
            .and_then(|ks| ks.get(stage - 1).copied())
            .unwrap_or(self.k)
    }

    /// s̃₁: the explicit override, else the pilot's (1−p)-quantile.
    pub fn first_level(&self) -> Result<f64, SplittingError> {
        if let Some(s1) = self.s1 {
            return Ok(s1);
        }
        let pilot = self
            .pilot
            .ok_or_else(|| SplittingError::InvalidConfig(vec![FieldError::new("s1", "required when no pilot model is given")]))?;
        pilot
            .quantile(1.0 - self.p)
            .map_err(|e| SplittingError::InvalidConfig(vec![FieldError::new("pilot", e.to_string())]))
    }
}

/// m = ⌈log α / log p⌉, so that p^m ≤ α (up to 1e−9 relative slack in the ratio).
pub fn plan_stage_count(alpha: f64, p: f64) -> Result<usize, SplittingError> {
    if !(alpha > 0.0 && p < 1.0 && alpha <= p) {
        return Err(SplittingError::Domain { alpha, p });
    }
    let ratio = alpha.ln() / p.ln();
    Ok(((ratio - 1e-9).ceil() as usize).max(1))
}

/// p₁·∏ stage probabilities.
pub fn splitting_identity(p1: f64, stage_probs: &[f64]) -> f64 {
    stage_probs.iter().fold(p1, |acc, q| acc * q)
}

/// s̃_{j+1} = s̃_j + (1−p)-quantile of the fitted law conditioned at s̃_j.
pub fn next_level_gpd(fit: &GpdParams, s_j: f64, p: f64) -> f64 {
    let cond = gpd_condition(fit, s_j);
    s_j + gpd_quantile(1.0 - p, &cond).unwrap_or(0.0)
}

/// Shape floor used by the Weibull transition; caps the first step at s₁·2⁴.
pub const WEIBULL_TRANSITION_MIN_SHAPE: f64 = 0.25;

/// Weibull transition. The first stage gives s₂ = s₁·2^(1/β); later stages
/// s_{j+1} = (2·s_j^β − s_{j−1}^β)^(1/β). The per-stage probability p
/// cancels from both equations.
pub fn next_level_weibull(beta_hat: f64, s_prev: f64, s_curr: f64, _p: f64, first_stage: bool) -> f64 {
    let beta_hat = beta_hat.max(WEIBULL_TRANSITION_MIN_SHAPE);
    if first_stage {
        s_curr * 2f64.powf(1.0 / beta_hat)
    } else {
        (2.0 * s_curr.powf(beta_hat) - s_prev.powf(beta_hat)).powf(1.0 / beta_hat)
    }
}

/// One batch request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRequest {
    /// 1-based stage index.
    pub stage: usize,
    pub level: f64,
    pub prev_level: f64,
    pub count: usize,
}

/// Source of binary outcomes: 1 when R̃ exceeds `level` (a failure on the
/// strength scale), given R̃ > `prev_level`.
pub trait TrialOracle {
    fn trials(&mut self, request: &TrialRequest) -> Vec<u8>;
}

impl<F: FnMut(&TrialRequest) -> Vec<u8>> TrialOracle for F {
    fn trials(&mut self, request: &TrialRequest) -> Vec<u8> {
        self(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    DegenerateBatch,
    RelaxedFit,
    ClampedLikelihood,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderFlag {
    pub stage: usize,
    pub kind: FlagKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFit {
    pub stage: usize,
    pub estimator: String,
    pub params: TailParams,
    /// Absent when the previous fit was carried over.
    pub diagnostics: Option<FitDiagnostics>,
}

/// Audit record of a (possibly partial) splitting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub model: ModelKind,
    pub alpha: f64,
    pub p: f64,
    pub m: usize,
    pub levels: Vec<f64>,
    pub phat: Vec<f64>,
    pub trials: Vec<usize>,
    pub failures: Vec<usize>,
    pub fits: Vec<StageFit>,
    pub flags: Vec<LadderFlag>,
    pub next_level: Option<f64>,
    pub attained_alpha: Option<f64>,
    pub estimate: Option<f64>,
    pub seed: u64,
    pub failure: Option<String>,
}

impl Ladder {
    pub fn is_complete(&self) -> bool {
        self.estimate.is_some()
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("ladder serializes")
    }
}

fn stage_seed(seed: u64, stage: usize) -> u64 {
    let mut z = seed ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Step-by-step splitting state; `run_splitting` and the campaign service
/// both drive it.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingRun {
    config: LadderConfig,
    model: ModelKind,
    m: usize,
    batches: Vec<BinaryBatch>,
    next: Option<f64>,
    fits: Vec<StageFit>,
    flags: Vec<LadderFlag>,
    current: Option<TailParams>,
    failure: Option<String>,
}

impl SplittingRun {
    pub fn new(config: LadderConfig, model: ModelKind) -> Result<Self, SplittingError> {
        config.validate(model).map_err(SplittingError::InvalidConfig)?;
        let m = config.stage_count()?;
        let s1 = config.first_level()?;
        Ok(Self {
            config,
            model,
            m,
            batches: Vec::new(),
            next: Some(s1),
            fits: Vec::new(),
            flags: Vec::new(),
            current: None,
            failure: None,
        })
    }

    pub fn config(&self) -> &LadderConfig {
        &self.config
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn stage_count(&self) -> usize {
        self.m
    }

    pub fn batches(&self) -> &[BinaryBatch] {
        &self.batches
    }

    pub fn current_fit(&self) -> Option<&TailParams> {
        self.current.as_ref()
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    pub fn is_complete(&self) -> bool {
        self.batches.len() == self.m
    }

    /// The next batch to run, if any.
    pub fn pending_request(&self) -> Option<TrialRequest> {
        if self.is_complete() || self.failure.is_some() {
            return None;
        }
        let stage = self.batches.len() + 1;
        Some(TrialRequest {
            stage,
            level: self.next?,
            prev_level: self.batches.last().map_or(0.0, |b| b.s_curr),
            count: self.config.trials_at(stage),
        })
    }

    fn anchor(&self) -> TailParams {
        if let Some(pilot) = self.config.pilot {
            return pilot;
        }
        let first = self.batches[0];
        let eps = 0.5 / first.k as f64;
        let prob = if first.is_degenerate() { self.config.p } else { first.phat() }.clamp(eps, 1.0 - eps);
        TailParams::unit_shape_through(self.model, first.s_curr, prob)
            .expect("positive level and probability in (0, 1)")
    }

    /// Records one batch of 0/1 outcomes, refits and plans the next level.
    pub fn record(&mut self, outcomes: &[u8], estimator: &dyn Estimator) -> Result<(), SplittingError> {
        if let Some(f) = &self.failure {
            return Err(SplittingError::Aborted(f.clone()));
        }
        let req = self.pending_request().ok_or(SplittingError::Complete)?;
        if outcomes.len() != req.count {
            return Err(SplittingError::OutcomeCount {
                stage: req.stage,
                expected: req.count,
                got: outcomes.len(),
            });
        }
        let batch = BinaryBatch::from_outcomes(req.prev_level, req.level, outcomes).map_err(|e| {
            SplittingError::InvalidOutcomes {
                stage: req.stage,
                message: e.to_string(),
            }
        })?;
        self.batches.push(batch);
        let stage = req.stage;
        let init = self.current.unwrap_or_else(|| self.anchor());

        if batch.is_degenerate() {
            self.flags.push(LadderFlag {
                stage,
                kind: FlagKind::DegenerateBatch,
                detail: format!("{} failures of {}", batch.failures, batch.k),
            });
            self.fits.push(StageFit {
                stage,
                estimator: "carried".into(),
                params: init,
                diagnostics: None,
            });
            self.current = Some(init);
        } else {
            let data = BinaryDataset {
                batches: self.batches.clone(),
            };
            let ctx = FitContext {
                model: self.model,
                init,
                bounds: self.config.fit.bounds.clone(),
                gamma: self.config.gamma,
                budget: self.config.fit.budget,
                seed: stage_seed(self.config.seed, stage),
                pair_mode: self.config.fit.pair_mode,
                proximity: self.config.fit.proximity,
            };
            let (name, result) = if data.len() < estimator.min_batches() {
                ("mle".to_string(), MleEstimator.fit(&data, &ctx))
            } else {
                (estimator.name().to_string(), estimator.fit(&data, &ctx))
            };
            let fit = match result {
                Ok(fit) => fit,
                Err(source) => {
                    self.failure = Some(format!("stage {stage}: {name}: {source}"));
                    self.next = None;
                    return Err(SplittingError::Estimator {
                        stage,
                        source,
                        ladder: Box::new(self.ladder()),
                    });
                }
            };
            if fit.diagnostics.relaxed {
                self.flags.push(LadderFlag {
                    stage,
                    kind: FlagKind::RelaxedFit,
                    detail: "no parameter met the confidence constraint; nearest point used".into(),
                });
            }
            if fit.diagnostics.clamped {
                self.flags.push(LadderFlag {
                    stage,
                    kind: FlagKind::ClampedLikelihood,
                    detail: "model probability clamped inside the log-likelihood".into(),
                });
            }
            self.current = Some(fit.params);
            self.fits.push(StageFit {
                stage,
                estimator: name,
                params: fit.params,
                diagnostics: Some(fit.diagnostics),
            });
        }

        self.next = if self.is_complete() {
            None
        } else {
            let fit = self.current.expect("fit set above");
            Some(self.next_level_from(&fit, stage))
        };
        Ok(())
    }

    fn next_level_from(&self, fit: &TailParams, stage: usize) -> f64 {
        let s_curr = self.batches[stage - 1].s_curr;
        let s_prev = self.batches[stage - 1].s_prev;
        match fit {
            TailParams::Gpd(g) => next_level_gpd(g, s_curr, self.config.p),
            TailParams::Weibull(w) => next_level_weibull(w.beta(), s_prev, s_curr, self.config.p, stage == 1),
        }
    }

    pub fn ladder(&self) -> Ladder {
        let complete = self.is_complete() && self.failure.is_none();
        Ladder {
            model: self.model,
            alpha: self.config.alpha,
            p: self.config.p,
            m: self.m,
            levels: self.batches.iter().map(|b| b.s_curr).collect(),
            phat: self.batches.iter().map(|b| b.phat()).collect(),
            trials: self.batches.iter().map(|b| b.k).collect(),
            failures: self.batches.iter().map(|b| b.failures).collect(),
            fits: self.fits.clone(),
            flags: self.flags.clone(),
            next_level: self.next,
            attained_alpha: self
                .batches
                .first()
                .map(|b| b.phat() * self.config.p.powi(self.m as i32 - 1)),
            estimate: if complete { self.batches.last().map(|b| b.s_curr) } else { None },
            seed: self.config.seed,
            failure: self.failure.clone(),
        }
    }
}

/// Runs all stages against `oracle`; the last level s̃_m estimates the
/// (1−α)-quantile of R̃.
pub fn run_splitting(
    config: &LadderConfig,
    model: ModelKind,
    oracle: &mut dyn TrialOracle,
    estimator: &dyn Estimator,
) -> Result<Ladder, SplittingError> {
    let mut run = SplittingRun::new(config.clone(), model)?;
    while let Some(req) = run.pending_request() {
        let outcomes = oracle.trials(&req);
        run.record(&outcomes, estimator)?;
    }
    Ok(run.ladder())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::FixedEstimator;

    fn truth() -> TailParams {
        TailParams::gpd(0.8, 1.5).unwrap()
    }

    #[test]
    fn stage_count_examples() {
        assert_eq!(plan_stage_count(1e-3, 0.2).unwrap(), 5);
        assert_eq!(plan_stage_count(1e-3, 0.3).unwrap(), 6);
        assert_eq!(plan_stage_count(0.25, 0.25).unwrap(), 1);
        assert_eq!(plan_stage_count(1e-3, 10f64.powf(-0.6)).unwrap(), 5);
        assert!(plan_stage_count(0.5, 0.2).is_err());
        for (a, p) in [(1e-3, 0.2), (1e-4, 0.27), (0.01, 0.5)] {
            let m = plan_stage_count(a, p).unwrap();
            assert!(p.powi(m as i32) <= a * (1.0 + 1e-9));
        }
    }

    #[test]
    fn identity_examples() {
        assert!((splitting_identity(0.25, &[0.2; 4]) - 4.0e-4).abs() < 1e-18);
        assert_eq!(splitting_identity(0.2, &[]), 0.2);
        let t = truth();
        let levels = [2.0, 7.5, 30.0, 110.0, 469.0];
        let mut prev = 0.0;
        let mut probs = Vec::new();
        for &s in &levels {
            probs.push(t.conditional_survival(prev, s));
            prev = s;
        }
        let prod = splitting_identity(probs[0], &probs[1..]);
        assert!((prod / t.survival(469.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn next_level_gpd_examples() {
        let g = GpdParams::new(0.8, 1.5).unwrap();
        let s1 = g.quantile(0.8).unwrap();
        let s2 = next_level_gpd(&g, s1, 0.2);
        assert!((crate::distributions::gpd_survival(s2 - s1, &gpd_condition(&g, s1)) - 0.2).abs() < 1e-10);
        let s = next_level_gpd(&g, s1, 1.0 - 1e-12);
        assert!(s - s1 < 1e-9 * g.a() && s >= s1);
    }

    #[test]
    fn next_level_weibull_examples() {
        assert!((next_level_weibull(2.0, 0.0, 10.0, 0.2, true) - 14.1421).abs() < 1e-4);
        assert!((next_level_weibull(2.0, 10.0, 14.1421, 0.2, false) - 17.3205).abs() < 1e-4);
        assert!((next_level_weibull(1.0, 3.0, 5.0, 0.2, false) - 7.0).abs() < 1e-12);
        assert!((next_level_weibull(0.01, 0.0, 1.0, 0.2, true) - 16.0).abs() < 1e-9);
    }

    fn exact_oracle(t: TailParams) -> impl FnMut(&TrialRequest) -> Vec<u8> {
        move |req: &TrialRequest| {
            let pi = t.conditional_survival(req.prev_level, req.level);
            let f = (pi * req.count as f64).round() as usize;
            (0..req.count).map(|i| u8::from(i < f)).collect()
        }
    }

    #[test]
    fn exact_iterations_reach_the_quantile() {
        let t = truth();
        let p = 10f64.powf(-0.6);
        let mut cfg = LadderConfig::new(1e-3, p, 100, t.quantile(1.0 - p).unwrap());
        cfg.m = Some(5);
        let est = FixedEstimator::new("exact", t);
        let ladder = run_splitting(&cfg, ModelKind::Gpd, &mut exact_oracle(t), &est).unwrap();
        assert!((ladder.estimate.unwrap() - 469.103).abs() < 0.1);

        let cfg = LadderConfig::new(1e-3, 0.2, 100, t.quantile(0.8).unwrap());
        let ladder = run_splitting(&cfg, ModelKind::Gpd, &mut exact_oracle(t), &est).unwrap();
        assert_eq!(ladder.levels.len(), 5);
        let want = t.quantile(1.0 - 0.2f64.powi(5)).unwrap();
        assert!((ladder.estimate.unwrap() / want - 1.0).abs() < 1e-6);
        assert!(ladder.levels.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_stage() {
        let t = truth();
        let mut cfg = LadderConfig::new(0.2, 0.2, 50, 3.0);
        cfg.m = Some(1);
        let est = FixedEstimator::new("exact", t);
        let ladder = run_splitting(&cfg, ModelKind::Gpd, &mut exact_oracle(t), &est).unwrap();
        assert_eq!(ladder.levels, vec![3.0]);
        assert_eq!(ladder.estimate, Some(3.0));
        assert_eq!(ladder.phat.len(), 1);
    }

    #[test]
    fn degenerate_batch_carries_fit() {
        let t = truth();
        let cfg = LadderConfig::new(1e-3, 0.2, 10, 3.0);
        let mut calls = 0;
        let mut oracle = |req: &TrialRequest| {
            calls += 1;
            if calls == 2 {
                vec![0; req.count]
            } else {
                exact_oracle(t)(req)
            }
        };
        let ladder = run_splitting(&cfg, ModelKind::Gpd, &mut oracle, &FixedEstimator::new("exact", t)).unwrap();
        assert_eq!(ladder.flags[0].kind, FlagKind::DegenerateBatch);
        assert_eq!(ladder.flags[0].stage, 2);
        assert_eq!(ladder.fits[1].estimator, "carried");
        assert_eq!(ladder.fits[1].params, ladder.fits[0].params);
    }

    #[test]
    fn config_validation_lists_fields() {
        let mut cfg = LadderConfig::new(0.5, 0.2, 1, -1.0);
        cfg.gamma = 2.0;
        let errs = cfg.validate(ModelKind::Gpd).unwrap_err();
        let fields: Vec<_> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, ["p", "k", "s1", "gamma"]);
        let mut cfg = LadderConfig::new(1e-3, 0.2, 10, 1.0);
        cfg.s1 = None;
        assert!(cfg.validate(ModelKind::Gpd).is_err());
        cfg.pilot = Some(truth());
        assert!(cfg.validate(ModelKind::Gpd).is_ok());
        assert!((cfg.first_level().unwrap() - truth().quantile(0.8).unwrap()).abs() < 1e-12);
        assert!(cfg.validate(ModelKind::Weibull).is_err());
    }

    #[test]
    fn wrong_outcome_count_and_complete() {
        let t = truth();
        let mut cfg = LadderConfig::new(0.2, 0.2, 4, 3.0);
        cfg.m = Some(1);
        let est = FixedEstimator::new("exact", t);
        let mut run = SplittingRun::new(cfg, ModelKind::Gpd).unwrap();
        assert!(matches!(run.record(&[0, 1], &est), Err(SplittingError::OutcomeCount { .. })));
        run.record(&[0, 1, 0, 0], &est).unwrap();
        assert!(matches!(run.record(&[0, 1, 0, 0], &est), Err(SplittingError::Complete)));
    }
}
