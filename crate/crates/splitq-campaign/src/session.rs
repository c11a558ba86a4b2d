use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use splitq_core::distributions::ModelKind;
use splitq_core::estimators::{confidence_interval_p, EstimatorRegistry, Interval};
use splitq_core::splitting::{Ladder, LadderConfig, LadderFlag, SplittingError, SplittingRun, StageFit};

use crate::{AbatementTable, CampaignError};

/// One durable state change. A session is the fold of its events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        id: String,
        created: DateTime<Utc>,
        config: LadderConfig,
        model: ModelKind,
        estimator: String,
        #[serde(default)]
        abatement: Option<AbatementTable>,
    },
    BatchRecorded {
        stage: usize,
        outcomes: Vec<u8>,
    },
    /// The batch was stored but the refit failed; the session is aborted.
    BatchFailed {
        stage: usize,
        outcomes: Vec<u8>,
        error: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    AwaitingBatch,
    Complete,
    Aborted,
}

/// Next batch to run, on both scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub stage: usize,
    pub trials: usize,
    /// Threshold s̃ on the inverted scale.
    pub level: f64,
    /// Conditioning threshold of the batch, 0 at the first stage.
    pub prev_level: f64,
    /// Stress 1/s̃ in MPa.
    pub stress: f64,
    pub flaw_diameter: Option<f64>,
    /// Set when an abatement table exists but does not cover `stress`.
    pub flaw_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub alpha: f64,
    pub attained_alpha: Option<f64>,
    /// s̃_m, the (1−α)-quantile of R̃.
    pub level: f64,
    /// 1/s̃_m, the α-quantile of the strength.
    pub stress: f64,
}

/// Canonical session state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDoc {
    pub id: String,
    pub created: DateTime<Utc>,
    pub model: ModelKind,
    pub estimator: String,
    pub status: SessionStatus,
    pub config: LadderConfig,
    pub stage_count: usize,
    pub batches_recorded: usize,
    pub recommendation: Option<Recommendation>,
    pub estimate: Option<QuantileEstimate>,
    pub failure: Option<String>,
    pub abatement: Option<AbatementTable>,
    pub events: usize,
    pub ladder: Ladder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationDoc {
    pub id: String,
    pub status: SessionStatus,
    pub recommendation: Option<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub prev_level: f64,
    pub level: f64,
    pub stress: f64,
    pub trials: usize,
    pub failures: usize,
    pub phat: f64,
    /// I_γ around p̂.
    pub interval: Interval,
    pub fit: Option<StageFit>,
    pub flags: Vec<LadderFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session: SessionDoc,
    pub gamma: f64,
    pub stages: Vec<StageReport>,
    pub events: Vec<SessionEvent>,
}

#[derive(Debug, Clone)]
pub struct CampaignSession {
    id: String,
    created: DateTime<Utc>,
    model: ModelKind,
    estimator: String,
    abatement: Option<AbatementTable>,
    run: SplittingRun,
    events: Vec<SessionEvent>,
}

impl CampaignSession {
    /// Validates a creation event and builds the fresh session from it.
    pub fn create(created: SessionEvent, registry: &EstimatorRegistry) -> Result<Self, CampaignError> {
        let SessionEvent::Created {
            id,
            created: at,
            config,
            model,
            estimator,
            abatement,
        } = created.clone()
        else {
            return Err(CampaignError::Replay {
                index: 0,
                message: "first event must be `created`".into(),
            });
        };
        registry
            .get(&estimator)
            .map_err(|_| CampaignError::UnknownEstimator(estimator.clone()))?;
        let run = SplittingRun::new(config, model)?;
        Ok(Self {
            id,
            created: at,
            model,
            estimator,
            abatement,
            run,
            events: vec![created],
        })
    }

    /// Rebuilds a session by re-running every recorded batch.
    pub fn replay(events: &[SessionEvent], registry: &EstimatorRegistry) -> Result<Self, CampaignError> {
        let (first, rest) = events.split_first().ok_or(CampaignError::Replay {
            index: 0,
            message: "empty event log".into(),
        })?;
        let mut session = Self::create(first.clone(), registry)?;
        for (i, event) in rest.iter().enumerate() {
            let index = i + 1;
            let diverged = |message: String| CampaignError::Replay { index, message };
            let (next, run) = session.prepare(event_outcomes(event).ok_or_else(|| diverged("duplicate `created`".into()))?, registry)?;
            let same = match (&next, event) {
                (SessionEvent::BatchRecorded { stage: a, .. }, SessionEvent::BatchRecorded { stage: b, .. }) => a == b,
                (
                    SessionEvent::BatchFailed { stage: a, error: ea, .. },
                    SessionEvent::BatchFailed { stage: b, error: eb, .. },
                ) => a == b && ea == eb,
                _ => false,
            };
            if !same {
                return Err(diverged(format!("log has {event:?}, re-run gives {next:?}")));
            }
            session.commit(next, run);
        }
        Ok(session)
    }

    /// Computes the event and successor state for a batch without mutating.
    /// Validation failures return an error and produce no event.
    pub fn prepare(
        &self,
        outcomes: &[u8],
        registry: &EstimatorRegistry,
    ) -> Result<(SessionEvent, SplittingRun), CampaignError> {
        let estimator = registry
            .get(&self.estimator)
            .map_err(|_| CampaignError::UnknownEstimator(self.estimator.clone()))?;
        let stage = self.run.batches().len() + 1;
        let mut run = self.run.clone();
        match run.record(outcomes, estimator.as_ref()) {
            Ok(()) => Ok((
                SessionEvent::BatchRecorded {
                    stage,
                    outcomes: outcomes.to_vec(),
                },
                run,
            )),
            Err(SplittingError::Estimator { source, .. }) => Ok((
                SessionEvent::BatchFailed {
                    stage,
                    outcomes: outcomes.to_vec(),
                    error: source.to_string(),
                },
                run,
            )),
            Err(e) => Err(e.into()),
        }
    }

    pub fn commit(&mut self, event: SessionEvent, run: SplittingRun) {
        self.events.push(event);
        self.run = run;
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn created(&self) -> DateTime<Utc> {
        self.created
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn run(&self) -> &SplittingRun {
        &self.run
    }

    /// Trial count expected by the next batch.
    pub fn pending_trials(&self) -> Option<usize> {
        self.run.pending_request().map(|r| r.count)
    }

    pub fn status(&self) -> SessionStatus {
        if self.run.failure().is_some() {
            SessionStatus::Aborted
        } else if self.run.is_complete() {
            SessionStatus::Complete
        } else {
            SessionStatus::AwaitingBatch
        }
    }

    pub fn recommendation(&self) -> Option<Recommendation> {
        let req = self.run.pending_request()?;
        let stress = 1.0 / req.level;
        let (flaw_diameter, flaw_error) = match &self.abatement {
            None => (None, None),
            Some(t) => match t.flaw_for(stress) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            },
        };
        Some(Recommendation {
            stage: req.stage,
            trials: req.count,
            level: req.level,
            prev_level: req.prev_level,
            stress,
            flaw_diameter,
            flaw_error,
        })
    }

    pub fn doc(&self) -> SessionDoc {
        let ladder = self.run.ladder();
        let estimate = ladder.estimate.map(|level| QuantileEstimate {
            alpha: ladder.alpha,
            attained_alpha: ladder.attained_alpha,
            level,
            stress: 1.0 / level,
        });
        SessionDoc {
            id: self.id.clone(),
            created: self.created,
            model: self.model,
            estimator: self.estimator.clone(),
            status: self.status(),
            config: self.run.config().clone(),
            stage_count: self.run.stage_count(),
            batches_recorded: self.run.batches().len(),
            recommendation: self.recommendation(),
            estimate,
            failure: self.run.failure().map(str::to_string),
            abatement: self.abatement.clone(),
            events: self.events.len(),
            ladder,
        }
    }

    pub fn recommendation_doc(&self) -> RecommendationDoc {
        RecommendationDoc {
            id: self.id.clone(),
            status: self.status(),
            recommendation: self.recommendation(),
        }
    }

    pub fn report(&self) -> SessionReport {
        let doc = self.doc();
        let gamma = self.run.config().gamma;
        let stages = self
            .run
            .batches()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let stage = i + 1;
                StageReport {
                    stage,
                    prev_level: b.s_prev,
                    level: b.s_curr,
                    stress: 1.0 / b.s_curr,
                    trials: b.k,
                    failures: b.failures,
                    phat: b.phat(),
                    interval: confidence_interval_p(b, gamma),
                    fit: doc.ladder.fits.iter().find(|f| f.stage == stage).cloned(),
                    flags: doc.ladder.flags.iter().filter(|f| f.stage == stage).cloned().collect(),
                }
            })
            .collect();
        SessionReport {
            session: doc,
            gamma,
            stages,
            events: self.events.clone(),
        }
    }

    /// Canonical serialization used for replay comparisons.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&(self.doc(), &self.events)).expect("session serializes")
    }
}

fn event_outcomes(event: &SessionEvent) -> Option<&[u8]> {
    match event {
        SessionEvent::Created { .. } => None,
        SessionEvent::BatchRecorded { outcomes, .. } | SessionEvent::BatchFailed { outcomes, .. } => Some(outcomes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn created(k: usize) -> SessionEvent {
        let mut config = LadderConfig::new(1e-3, 0.2, k, 1.0 / 400.0);
        config.seed = 3;
        SessionEvent::Created {
            id: "s1".into(),
            created: DateTime::parse_from_rfc3339("2024-05-01T08:00:00Z").unwrap().with_timezone(&Utc),
            config,
            model: ModelKind::Gpd,
            estimator: "enhanced".into(),
            abatement: Some(AbatementTable::new(vec![(0.0, 500.0), (1.8, 200.0)], None).unwrap()),
        }
    }

    fn batch(k: usize, failures: usize) -> Vec<u8> {
        (0..k).map(|i| u8::from(i < failures)).collect()
    }

    #[test]
    fn fresh_session_recommends_first_level() {
        let reg = EstimatorRegistry::builtin();
        let s = CampaignSession::create(created(50), &reg).unwrap();
        assert_eq!(s.status(), SessionStatus::AwaitingBatch);
        assert_eq!(s.run().stage_count(), 5);
        let r = s.recommendation().unwrap();
        assert_eq!(r.stage, 1);
        assert!((r.stress - 400.0).abs() < 1e-9);
        assert!((r.flaw_diameter.unwrap() - 0.6).abs() < 1e-12);
        let report = s.report();
        assert!(report.stages.is_empty());
        assert_eq!(report.events.len(), 1);
    }

    #[test]
    fn records_and_replays() {
        let reg = EstimatorRegistry::builtin();
        let mut s = CampaignSession::create(created(50), &reg).unwrap();
        for f in [10, 12, 9] {
            let (ev, run) = s.prepare(&batch(50, f), &reg).unwrap();
            s.commit(ev, run);
        }
        assert_eq!(s.run().batches()[0].phat(), 0.2);
        let again = CampaignSession::replay(s.events(), &reg).unwrap();
        assert_eq!(again.canonical_json(), s.canonical_json());
    }

    #[test]
    fn wrong_count_produces_no_event() {
        let reg = EstimatorRegistry::builtin();
        let s = CampaignSession::create(created(50), &reg).unwrap();
        assert!(matches!(
            s.prepare(&batch(49, 3), &reg),
            Err(CampaignError::Splitting(SplittingError::OutcomeCount { .. }))
        ));
        assert_eq!(s.events().len(), 1);
    }

    #[test]
    fn tampered_log_diverges() {
        let reg = EstimatorRegistry::builtin();
        let mut s = CampaignSession::create(created(20), &reg).unwrap();
        let (ev, run) = s.prepare(&batch(20, 4), &reg).unwrap();
        s.commit(ev, run);
        let mut events = s.events().to_vec();
        events[1] = SessionEvent::BatchFailed {
            stage: 1,
            outcomes: batch(20, 4),
            error: "boom".into(),
        };
        assert!(matches!(CampaignSession::replay(&events, &reg), Err(CampaignError::Replay { index: 1, .. })));
    }
}
