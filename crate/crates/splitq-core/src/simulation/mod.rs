//! Seeded sampling, trial oracles, Monte Carlo studies and table rendering.

mod procedures;
mod stats;
mod study;
mod table;

pub use procedures::{
    CrmProcedure, DeValkProcedure, Estimate, FirstLevel, OracleKind, Procedure, ProcedureBuilder, ProcedureRegistry, ReplicaOutput,
    SplittingProcedure, StaircaseProcedure,
};
pub use stats::{relative_error, SummaryStats};
pub use study::{run_study, QuantitySummary, ReplicaRecord, StudyFile, StudyResult, StudyRow, StudySpec};
pub use table::{emit_table, RenderedTable, TableLayout, TableRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::LevelOracle;
use crate::distributions::{
    gpd_condition, DistributionError, ExponentialParams, GaussianParams, GpdParams, TailParams, WeibullParams,
};
use crate::splitting::{TrialOracle, TrialRequest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("unknown procedure `{0}`")]
    UnknownProcedure(String),
    #[error("invalid configuration for `{procedure}`: {message}")]
    InvalidConfig { procedure: String, message: String },
    #[error("`{procedure}` cannot run against a {truth} truth")]
    Incompatible { procedure: String, truth: String },
    #[error("replica count must be at least 1")]
    NoReplicas,
    #[error("procedure failed: {0}")]
    Procedure(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Root seed of a study; every replica and lane gets its own ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Stream `replica` of the root seed, jumped ahead by `lane`·2⁶⁴ words.
    pub fn stream(&self, replica: u64, lane: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(replica);
        rng.set_word_pos(u128::from(lane) << 64);
        rng
    }

    /// A 64-bit seed for components that take one.
    pub fn derive(&self, replica: u64, lane: u64) -> u64 {
        self.stream(replica, lane).random()
    }
}

/// Data-generating law of a study. GPD and Weibull live on the inverted
/// scale; the exponential and Gaussian laws describe the strength R directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TruthModel {
    Gpd { c: f64, a: f64 },
    Weibull { alpha: f64, beta: f64 },
    Exponential { lambda: f64 },
    Gaussian { mu: f64, sigma: f64 },
}

impl TruthModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gpd { .. } => "gpd",
            Self::Weibull { .. } => "weibull",
            Self::Exponential { .. } => "exponential",
            Self::Gaussian { .. } => "gaussian",
        }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        match *self {
            Self::Gpd { c, a } => GpdParams::new(c, a).map(|_| ()),
            Self::Weibull { alpha, beta } => WeibullParams::new(alpha, beta).map(|_| ()),
            Self::Exponential { lambda } => ExponentialParams::new(lambda).map(|_| ()),
            Self::Gaussian { mu, sigma } => GaussianParams::new(mu, sigma).map(|_| ()),
        }
    }

    /// The inverted-scale tail law, when the truth has one.
    pub fn tail(&self) -> Option<TailParams> {
        match *self {
            Self::Gpd { c, a } => TailParams::gpd(c, a).ok(),
            Self::Weibull { alpha, beta } => TailParams::weibull(alpha, beta).ok(),
            _ => None,
        }
    }

    /// P(R ≤ s) for the strength-scale laws.
    pub fn strength_cdf(&self, s: f64) -> Option<f64> {
        match *self {
            Self::Exponential { lambda } => ExponentialParams::new(lambda).ok().map(|e| e.cdf(s)),
            Self::Gaussian { mu, sigma } => GaussianParams::new(mu, sigma).ok().map(|g| g.cdf(s)),
            _ => None,
        }
    }

    /// The extreme quantile each procedure is scored against: the upper
    /// (1−α)-quantile of R̃ for tail laws, the lower α-quantile of R otherwise.
    pub fn target_quantile(&self, alpha: f64) -> Result<f64, DistributionError> {
        match *self {
            Self::Gpd { .. } | Self::Weibull { .. } => self.tail().ok_or(DistributionError::InvalidParameter {
                name: "truth",
                value: f64::NAN,
                reason: "invalid tail parameters",
            })?
            .quantile(1.0 - alpha),
            Self::Exponential { lambda } => ExponentialParams::new(lambda)?.quantile(alpha),
            Self::Gaussian { mu, sigma } => GaussianParams::new(mu, sigma)?.quantile(alpha),
        }
    }
}

/// Inverse-cdf draw of R̃ given R̃ > `s_lower`.
pub fn sample_truncated(params: &TailParams, s_lower: f64, u: f64) -> f64 {
    let s = s_lower.max(0.0);
    match params {
        TailParams::Gpd(g) => s + gpd_condition(g, s).quantile_unchecked(u),
        TailParams::Weibull(w) => {
            let (alpha, beta) = (w.alpha(), w.beta());
            alpha * ((s / alpha).powf(beta) - (-u).ln_1p()).powf(1.0 / beta)
        }
    }
}

/// Bernoulli outcomes with the exact conditional survival as success probability.
#[derive(Debug, Clone)]
pub struct BernoulliOracle {
    truth: TailParams,
    rng: ChaCha8Rng,
}

impl BernoulliOracle {
    pub fn new(truth: TailParams, rng: ChaCha8Rng) -> Self {
        Self { truth, rng }
    }

    pub fn success_probability(&self, request: &TrialRequest) -> f64 {
        self.truth.conditional_survival(request.prev_level, request.level)
    }
}

impl TrialOracle for BernoulliOracle {
    fn trials(&mut self, request: &TrialRequest) -> Vec<u8> {
        let pi = self.success_probability(request);
        (0..request.count).map(|_| u8::from(self.rng.random::<f64>() < pi)).collect()
    }
}

/// Thresholds truncated samples R̃ | R̃ > prev at the requested level.
#[derive(Debug, Clone)]
pub struct TruncatedOracle {
    truth: TailParams,
    rng: ChaCha8Rng,
}

impl TruncatedOracle {
    pub fn new(truth: TailParams, rng: ChaCha8Rng) -> Self {
        Self { truth, rng }
    }
}

impl TrialOracle for TruncatedOracle {
    fn trials(&mut self, request: &TrialRequest) -> Vec<u8> {
        (0..request.count)
            .map(|_| {
                let r = sample_truncated(&self.truth, request.prev_level, self.rng.random());
                u8::from(r > request.level)
            })
            .collect()
    }
}

/// Failure (1) with probability P(R ≤ s) under a strength-scale truth.
#[derive(Debug, Clone)]
pub struct StrengthOracle {
    truth: TruthModel,
    rng: ChaCha8Rng,
}

impl StrengthOracle {
    pub fn new(truth: TruthModel, rng: ChaCha8Rng) -> Option<Self> {
        truth.strength_cdf(0.0)?;
        Some(Self { truth, rng })
    }
}

impl LevelOracle for StrengthOracle {
    fn trial(&mut self, level: f64) -> u8 {
        let p = self.truth.strength_cdf(level).unwrap_or(0.0);
        u8::from(self.rng.random::<f64>() < p)
    }
}
