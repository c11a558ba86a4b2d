//! Live splitting campaigns: sessions driven batch by batch from real trial
//! outcomes, an append-only event log, and the HTTP API for the operator UI.

mod abatement;
mod error;
pub mod http;
mod service;
mod session;
mod store;

pub use abatement::{recommend_flaw, AbatementTable};
pub use error::CampaignError;
pub use service::{BatchInput, CampaignService, CreateSession, SessionSummary};
pub use session::{
    CampaignSession, QuantileEstimate, Recommendation, RecommendationDoc, SessionDoc, SessionEvent, SessionReport,
    SessionStatus, StageReport,
};
pub use store::{read_log, EventStore, FileStore, MemoryStore};
