use splitq_core::splitting::{FieldError, SplittingError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid request: {}", .0.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
    #[error("unknown estimator {0:?}")]
    UnknownEstimator(String),
    #[error("abatement table: {0}")]
    Abatement(String),
    #[error("target stress {stress} MPa is outside the table range [{lo}, {hi}] MPa")]
    OutOfRange { stress: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Splitting(SplittingError),
    #[error("estimator failed at stage {stage}: {message}")]
    EstimatorFailed { stage: usize, message: String },
    #[error("session {0} not found")]
    NotFound(String),
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
    #[error("event log {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("replay diverged at event {index}: {message}")]
    Replay { index: usize, message: String },
}

impl CampaignError {
    pub(crate) fn field(field: &str, message: impl Into<String>) -> Self {
        CampaignError::Invalid(vec![FieldError {
            field: field.to_string(),
            message: message.into(),
        }])
    }

    /// Field-level messages for the wire format.
    pub fn fields(&self) -> Vec<FieldError> {
        let one = |field: &str, message: String| {
            vec![FieldError {
                field: field.to_string(),
                message,
            }]
        };
        match self {
            CampaignError::Invalid(f) => f.clone(),
            CampaignError::Splitting(SplittingError::InvalidConfig(f)) => f
                .iter()
                .map(|e| FieldError {
                    field: format!("config.{}", e.field),
                    message: e.message.clone(),
                })
                .collect(),
            CampaignError::Splitting(SplittingError::Domain { .. }) => one("config.alpha", self.to_string()),
            CampaignError::Splitting(SplittingError::OutcomeCount { .. } | SplittingError::InvalidOutcomes { .. }) => {
                one("outcomes", self.to_string())
            }
            CampaignError::UnknownEstimator(_) => one("estimator", self.to_string()),
            CampaignError::Abatement(_) => one("abatement", self.to_string()),
            _ => Vec::new(),
        }
    }
}

impl From<SplittingError> for CampaignError {
    fn from(e: SplittingError) -> Self {
        match e {
            SplittingError::Estimator { stage, source, .. } => CampaignError::EstimatorFailed {
                stage,
                message: source.to_string(),
            },
            other => CampaignError::Splitting(other),
        }
    }
}
