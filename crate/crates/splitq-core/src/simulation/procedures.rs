use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{BernoulliOracle, RngSeed, SimulationError, StrengthOracle, TruncatedOracle, TruthModel};
use crate::baselines::{
    crm_run, devalk_quantile, staircase_mle, staircase_run, CrmConfig, DeValkConfig, StaircaseConfig,
    StaircaseEstimate,
};
use crate::distributions::ModelKind;
use crate::estimators::{Estimator, EstimatorRegistry};
use crate::splitting::{run_splitting, LadderConfig, SplittingError, TrialOracle};

/// One scored quantity of a replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub quantity: String,
    pub value: f64,
    pub truth: f64,
}

impl Estimate {
    fn new(quantity: &str, value: f64, truth: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            value,
            truth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaOutput {
    pub estimates: Vec<Estimate>,
    /// The procedure's run document (ladder, staircase record, ...).
    pub document: serde_json::Value,
}

/// A procedure runnable against a truth model with per-replica RNG streams.
pub trait Procedure: Send + Sync {
    fn name(&self) -> &str;

    fn check_truth(&self, truth: &TruthModel) -> Result<(), SimulationError>;

    fn run(&self, truth: &TruthModel, seed: RngSeed, replica: u64) -> Result<ReplicaOutput, SimulationError>;
}

fn incompatible(procedure: &str, truth: &TruthModel) -> SimulationError {
    SimulationError::Incompatible {
        procedure: procedure.to_string(),
        truth: truth.name().to_string(),
    }
}

fn parse<T: DeserializeOwned>(procedure: &str, config: &serde_json::Value) -> Result<T, SimulationError> {
    serde_json::from_value(config.clone()).map_err(|e| SimulationError::InvalidConfig {
        procedure: procedure.to_string(),
        message: e.to_string(),
    })
}

fn to_document<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("run documents serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    #[default]
    Bernoulli,
    Truncated,
}

/// Where a simulated ladder takes s̃₁ from when the config has no `s1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FirstLevel {
    /// The truth's (1−p)-quantile.
    #[default]
    Truth,
    /// The pilot's (1−p)-quantile.
    Pilot,
}

#[derive(Debug, Clone, Deserialize)]
struct SplittingSettings {
    model: ModelKind,
    estimator: String,
    #[serde(default)]
    oracle: OracleKind,
    #[serde(default)]
    first_level: FirstLevel,
    ladder: LadderConfig,
}

/// Splitting ladder against a tail truth.
pub struct SplittingProcedure {
    pub model: ModelKind,
    pub estimator: Arc<dyn Estimator>,
    pub oracle: OracleKind,
    pub first_level: FirstLevel,
    pub ladder: LadderConfig,
}

impl Procedure for SplittingProcedure {
    fn name(&self) -> &str {
        "splitting"
    }

    fn check_truth(&self, truth: &TruthModel) -> Result<(), SimulationError> {
        truth.tail().map(|_| ()).ok_or_else(|| incompatible("splitting", truth))
    }

    fn run(&self, truth: &TruthModel, seed: RngSeed, replica: u64) -> Result<ReplicaOutput, SimulationError> {
        let tail = truth.tail().ok_or_else(|| incompatible("splitting", truth))?;
        let mut config = self.ladder.clone();
        if config.s1.is_none() && (self.first_level == FirstLevel::Truth || config.pilot.is_none()) {
            config.s1 = Some(tail.quantile(1.0 - config.p)?);
        }
        config.seed = seed.derive(replica, 1);
        let rng = seed.stream(replica, 0);
        let mut oracle: Box<dyn TrialOracle> = match self.oracle {
            OracleKind::Bernoulli => Box::new(BernoulliOracle::new(tail, rng)),
            OracleKind::Truncated => Box::new(TruncatedOracle::new(tail, rng)),
        };
        let ladder = run_splitting(&config, self.model, oracle.as_mut(), self.estimator.as_ref()).map_err(|e| match e {
            SplittingError::Estimator { stage, source, .. } => {
                SimulationError::Procedure(format!("stage {stage}: {source}"))
            }
            other => SimulationError::Procedure(other.to_string()),
        })?;
        let estimate = ladder.estimate.ok_or_else(|| SimulationError::Procedure("incomplete ladder".into()))?;
        Ok(ReplicaOutput {
            estimates: vec![Estimate::new("quantile", estimate, truth.target_quantile(config.alpha)?)],
            document: to_document(&ladder),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
struct StaircaseSettings {
    staircase: StaircaseConfig,
    alpha: f64,
}

pub struct StaircaseProcedure {
    pub config: StaircaseConfig,
    pub alpha: f64,
}

impl Procedure for StaircaseProcedure {
    fn name(&self) -> &str {
        "staircase"
    }

    fn check_truth(&self, truth: &TruthModel) -> Result<(), SimulationError> {
        truth.strength_cdf(0.0).map(|_| ()).ok_or_else(|| incompatible("staircase", truth))
    }

    fn run(&self, truth: &TruthModel, seed: RngSeed, replica: u64) -> Result<ReplicaOutput, SimulationError> {
        let mut oracle =
            StrengthOracle::new(*truth, seed.stream(replica, 0)).ok_or_else(|| incompatible("staircase", truth))?;
        let fail = |e: crate::baselines::BaselineError| SimulationError::Procedure(e.to_string());
        let run = staircase_run(&self.config, &mut oracle).map_err(fail)?;
        let est = staircase_mle(&run.levels, &run.outcomes, self.config.model).map_err(fail)?;
        let q = est.quantile(self.alpha).map_err(fail)?;
        let mut estimates = Vec::new();
        match (est, *truth) {
            (StaircaseEstimate::Exponential { lambda, .. }, TruthModel::Exponential { lambda: l0 }) => {
                estimates.push(Estimate::new("lambda", lambda, l0));
            }
            (StaircaseEstimate::Gaussian { mu, sigma, .. }, TruthModel::Gaussian { mu: m0, sigma: s0 }) => {
                estimates.push(Estimate::new("mu", mu, m0));
                estimates.push(Estimate::new("sigma", sigma, s0));
            }
            _ => {}
        }
        estimates.push(Estimate::new("quantile", q, truth.target_quantile(self.alpha)?));
        Ok(ReplicaOutput {
            estimates,
            document: serde_json::json!({ "run": to_document(&run), "fit": to_document(&est) }),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
struct CrmSettings {
    crm: CrmConfig,
    #[serde(default)]
    report_alpha: Option<f64>,
}

pub struct CrmProcedure {
    pub config: CrmConfig,
    /// Probability of the scored quantile; the CRM target when absent.
    pub report_alpha: Option<f64>,
}

impl Procedure for CrmProcedure {
    fn name(&self) -> &str {
        "crm"
    }

    fn check_truth(&self, truth: &TruthModel) -> Result<(), SimulationError> {
        truth.strength_cdf(0.0).map(|_| ()).ok_or_else(|| incompatible("crm", truth))
    }

    fn run(&self, truth: &TruthModel, seed: RngSeed, replica: u64) -> Result<ReplicaOutput, SimulationError> {
        let mut oracle = StrengthOracle::new(*truth, seed.stream(replica, 0)).ok_or_else(|| incompatible("crm", truth))?;
        let mut rng = seed.stream(replica, 1);
        let run = crm_run(&self.config, &mut oracle, &mut rng).map_err(|e| SimulationError::Procedure(e.to_string()))?;
        let alpha = self.report_alpha.unwrap_or(self.config.alpha_target);
        let mut estimates = vec![Estimate::new("quantile", run.quantile(alpha), truth.target_quantile(alpha)?)];
        if let TruthModel::Exponential { lambda } = *truth {
            estimates.push(Estimate::new("lambda", run.lambda, lambda));
        }
        Ok(ReplicaOutput {
            estimates,
            document: to_document(&run),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
struct DeValkSettings {
    n: usize,
    alpha: f64,
    devalk: DeValkConfig,
}

/// de Valk's estimator on n complete draws of R̃.
pub struct DeValkProcedure {
    pub n: usize,
    pub alpha: f64,
    pub config: DeValkConfig,
}

impl Procedure for DeValkProcedure {
    fn name(&self) -> &str {
        "devalk"
    }

    fn check_truth(&self, truth: &TruthModel) -> Result<(), SimulationError> {
        truth.tail().map(|_| ()).ok_or_else(|| incompatible("devalk", truth))
    }

    fn run(&self, truth: &TruthModel, seed: RngSeed, replica: u64) -> Result<ReplicaOutput, SimulationError> {
        use rand::Rng;
        let tail = truth.tail().ok_or_else(|| incompatible("devalk", truth))?;
        let mut rng = seed.stream(replica, 0);
        let sample: Vec<f64> = (0..self.n).map(|_| super::sample_truncated(&tail, 0.0, rng.random())).collect();
        let z = -self.alpha.ln();
        let q = devalk_quantile(&sample, z, &self.config).map_err(|e| SimulationError::Procedure(e.to_string()))?;
        Ok(ReplicaOutput {
            estimates: vec![Estimate::new("quantile", q, truth.target_quantile(self.alpha)?)],
            document: serde_json::json!({ "n": self.n, "l_n": self.config.l_for(self.n), "estimate": q }),
        })
    }
}

pub type ProcedureBuilder =
    Arc<dyn Fn(&serde_json::Value, &EstimatorRegistry) -> Result<Arc<dyn Procedure>, SimulationError> + Send + Sync>;

/// Procedures by name, each built from a JSON config.
#[derive(Clone)]
pub struct ProcedureRegistry {
    builders: BTreeMap<String, ProcedureBuilder>,
    estimators: EstimatorRegistry,
}

impl ProcedureRegistry {
    pub fn empty(estimators: EstimatorRegistry) -> Self {
        Self {
            builders: BTreeMap::new(),
            estimators,
        }
    }

    pub fn builtin(estimators: EstimatorRegistry) -> Self {
        let mut reg = Self::empty(estimators);
        reg.register(
            "splitting",
            Arc::new(|cfg, est| {
                let s: SplittingSettings = parse("splitting", cfg)?;
                let estimator = est.get(&s.estimator).map_err(|e| SimulationError::InvalidConfig {
                    procedure: "splitting".into(),
                    message: e.to_string(),
                })?;
                let mut probe = s.ladder.clone();
                if probe.s1.is_none() && probe.pilot.is_none() {
                    probe.s1 = Some(1.0);
                }
                probe.validate(s.model).map_err(|errs| SimulationError::InvalidConfig {
                    procedure: "splitting".into(),
                    message: errs.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "),
                })?;
                Ok(Arc::new(SplittingProcedure {
                    model: s.model,
                    estimator,
                    oracle: s.oracle,
                    first_level: s.first_level,
                    ladder: s.ladder,
                }) as Arc<dyn Procedure>)
            }),
        );
        reg.register(
            "staircase",
            Arc::new(|cfg, _| {
                let s: StaircaseSettings = parse("staircase", cfg)?;
                s.staircase.validate().map_err(|e| SimulationError::InvalidConfig {
                    procedure: "staircase".into(),
                    message: e.to_string(),
                })?;
                Ok(Arc::new(StaircaseProcedure {
                    config: s.staircase,
                    alpha: s.alpha,
                }) as Arc<dyn Procedure>)
            }),
        );
        reg.register(
            "crm",
            Arc::new(|cfg, _| {
                let s: CrmSettings = parse("crm", cfg)?;
                s.crm.validate().map_err(|e| SimulationError::InvalidConfig {
                    procedure: "crm".into(),
                    message: e.to_string(),
                })?;
                Ok(Arc::new(CrmProcedure {
                    config: s.crm,
                    report_alpha: s.report_alpha,
                }) as Arc<dyn Procedure>)
            }),
        );
        reg.register(
            "devalk",
            Arc::new(|cfg, _| {
                let s: DeValkSettings = parse("devalk", cfg)?;
                if s.devalk.l_for(s.n) == 0 || s.devalk.l_for(s.n) >= s.n {
                    return Err(SimulationError::InvalidConfig {
                        procedure: "devalk".into(),
                        message: format!("l_n must lie in [1, n) for n = {}", s.n),
                    });
                }
                Ok(Arc::new(DeValkProcedure {
                    n: s.n,
                    alpha: s.alpha,
                    config: s.devalk,
                }) as Arc<dyn Procedure>)
            }),
        );
        reg
    }

    pub fn register(&mut self, name: &str, builder: ProcedureBuilder) {
        self.builders.insert(name.to_string(), builder);
    }

    pub fn estimators(&self) -> &EstimatorRegistry {
        &self.estimators
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, config: &serde_json::Value) -> Result<Arc<dyn Procedure>, SimulationError> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| SimulationError::UnknownProcedure(name.to_string()))?;
        builder(config, &self.estimators)
    }
}
