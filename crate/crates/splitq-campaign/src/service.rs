use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use splitq_core::distributions::ModelKind;
use splitq_core::estimators::EstimatorRegistry;
use splitq_core::splitting::LadderConfig;

use crate::{
    AbatementTable, CampaignError, CampaignSession, EventStore, FileStore, MemoryStore, RecommendationDoc, SessionDoc,
    SessionEvent, SessionReport, SessionStatus,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub config: LadderConfig,
    pub model: ModelKind,
    #[serde(default = "default_estimator")]
    pub estimator: String,
    #[serde(default)]
    pub abatement: Option<AbatementTable>,
}

fn default_estimator() -> String {
    "enhanced".into()
}

/// A batch either as per-specimen outcomes or as a failure count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchInput {
    #[serde(default)]
    pub outcomes: Option<Vec<u8>>,
    #[serde(default)]
    pub failures: Option<usize>,
}

impl BatchInput {
    pub fn outcomes(outcomes: Vec<u8>) -> Self {
        Self {
            outcomes: Some(outcomes),
            failures: None,
        }
    }

    pub fn failures(failures: usize) -> Self {
        Self {
            outcomes: None,
            failures: Some(failures),
        }
    }

    fn resolve(self, trials: usize) -> Result<Vec<u8>, CampaignError> {
        match (self.outcomes, self.failures) {
            (Some(o), None) => Ok(o),
            (None, Some(f)) if f <= trials => Ok((0..trials).map(|i| u8::from(i < f)).collect()),
            (None, Some(f)) => Err(CampaignError::field("failures", format!("{f} exceeds the {trials} trials of this stage"))),
            (Some(_), Some(_)) => Err(CampaignError::field("outcomes", "give either outcomes or failures, not both")),
            (None, None) => Err(CampaignError::field("outcomes", "outcomes or failures required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub created: DateTime<Utc>,
    pub status: SessionStatus,
    pub model: ModelKind,
    pub batches_recorded: usize,
    pub stage_count: usize,
}

/// Session registry over an event store. Mutations of one session are
/// serialized by its mutex; reads of different sessions never contend.
pub struct CampaignService {
    registry: EstimatorRegistry,
    store: Box<dyn EventStore>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<CampaignSession>>>>,
}

impl CampaignService {
    pub fn in_memory(registry: EstimatorRegistry) -> Self {
        Self {
            registry,
            store: Box::new(MemoryStore::new()),
            sessions: RwLock::new(BTreeMap::new()),
        }
    }

    /// Opens a data directory and replays every stored session.
    pub fn open(data_dir: impl AsRef<Path>, registry: EstimatorRegistry) -> Result<Self, CampaignError> {
        Self::with_store(Box::new(FileStore::open(data_dir)?), registry)
    }

    pub fn with_store(store: Box<dyn EventStore>, registry: EstimatorRegistry) -> Result<Self, CampaignError> {
        let mut sessions = BTreeMap::new();
        for (id, events) in store.load()? {
            let session = CampaignSession::replay(&events, &registry)?;
            sessions.insert(id, Arc::new(Mutex::new(session)));
        }
        Ok(Self {
            registry,
            store,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn registry(&self) -> &EstimatorRegistry {
        &self.registry
    }

    pub fn create(&self, request: CreateSession) -> Result<SessionDoc, CampaignError> {
        self.create_with(uuid::Uuid::new_v4().simple().to_string(), Utc::now(), request)
    }

    /// Creation with caller-chosen id and timestamp.
    pub fn create_with(
        &self,
        id: String,
        created: DateTime<Utc>,
        request: CreateSession,
    ) -> Result<SessionDoc, CampaignError> {
        let event = SessionEvent::Created {
            id: id.clone(),
            created,
            config: request.config,
            model: request.model,
            estimator: request.estimator,
            abatement: request.abatement,
        };
        let session = CampaignSession::create(event.clone(), &self.registry)?;
        let mut sessions = self.sessions.write().expect("session map poisoned");
        if sessions.contains_key(&id) {
            return Err(CampaignError::field("id", format!("session {id} already exists")));
        }
        self.store.append(&id, &event)?;
        let doc = session.doc();
        sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok(doc)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<CampaignSession>>, CampaignError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| CampaignError::NotFound(id.to_string()))
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&CampaignSession) -> T) -> Result<T, CampaignError> {
        let s = self.session(id)?;
        let guard = s.lock().expect("session poisoned");
        Ok(f(&guard))
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        let sessions: Vec<_> = self.sessions.read().expect("session map poisoned").values().cloned().collect();
        let mut out: Vec<SessionSummary> = sessions
            .iter()
            .map(|s| {
                let s = s.lock().expect("session poisoned");
                SessionSummary {
                    id: s.id().to_string(),
                    created: s.created(),
                    status: s.status(),
                    model: s.run().model(),
                    batches_recorded: s.run().batches().len(),
                    stage_count: s.run().stage_count(),
                }
            })
            .collect();
        out.sort_by(|a, b| a.created.cmp(&b.created).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn get(&self, id: &str) -> Result<SessionDoc, CampaignError> {
        self.read(id, CampaignSession::doc)
    }

    pub fn report(&self, id: &str) -> Result<SessionReport, CampaignError> {
        self.read(id, CampaignSession::report)
    }

    pub fn recommendation(&self, id: &str) -> Result<RecommendationDoc, CampaignError> {
        self.read(id, CampaignSession::recommendation_doc)
    }

    pub fn events(&self, id: &str) -> Result<Vec<SessionEvent>, CampaignError> {
        self.read(id, |s| s.events().to_vec())
    }

    pub fn canonical_json(&self, id: &str) -> Result<String, CampaignError> {
        self.read(id, CampaignSession::canonical_json)
    }

    /// Records one batch. The event is made durable before the in-memory
    /// state changes. An estimator failure is recorded (the session aborts)
    /// and then reported as an error.
    pub fn record(&self, id: &str, input: BatchInput) -> Result<SessionDoc, CampaignError> {
        let s = self.session(id)?;
        let mut session = s.lock().expect("session poisoned");
        let trials = match session.status() {
            SessionStatus::Complete => return Err(splitq_core::splitting::SplittingError::Complete.into()),
            SessionStatus::Aborted => {
                let reason = session.run().failure().unwrap_or_default().to_string();
                return Err(splitq_core::splitting::SplittingError::Aborted(reason).into());
            }
            SessionStatus::AwaitingBatch => session.pending_trials().expect("awaiting a batch"),
        };
        let outcomes = input.resolve(trials)?;
        let (event, run) = session.prepare(&outcomes, &self.registry)?;
        self.store.append(id, &event)?;
        let failed = match &event {
            SessionEvent::BatchFailed { stage, error, .. } => Some(CampaignError::EstimatorFailed {
                stage: *stage,
                message: error.clone(),
            }),
            _ => None,
        };
        session.commit(event, run);
        match failed {
            Some(e) => Err(e),
            None => Ok(session.doc()),
        }
    }
}
