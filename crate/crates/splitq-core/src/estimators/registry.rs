use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    BinaryDataset, DivergenceEstimator, DivergenceKind, EnhancedEstimator, EstimateError, Estimator, Fit, FitContext,
    FitDiagnostics, MleEstimator,
};
use crate::distributions::TailParams;

/// Estimators addressable by name.
#[derive(Clone, Default)]
pub struct EstimatorRegistry {
    entries: BTreeMap<String, Arc<dyn Estimator>>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// mle, kl, hellinger, l1 and enhanced.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(MleEstimator));
        for kind in [DivergenceKind::Kl, DivergenceKind::Hellinger, DivergenceKind::L1] {
            r.register(Arc::new(DivergenceEstimator(kind)));
        }
        r.register(Arc::new(EnhancedEstimator));
        r
    }

    /// Registers under the estimator's own name, replacing any previous entry.
    pub fn register(&mut self, estimator: Arc<dyn Estimator>) {
        self.entries.insert(estimator.name().to_string(), estimator);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Estimator>, EstimateError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| EstimateError::UnknownEstimator(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl std::fmt::Debug for EstimatorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// Returns the same parameters whatever the data; the exact-fit oracle.
#[derive(Debug, Clone)]
pub struct FixedEstimator {
    name: String,
    params: TailParams,
}

impl FixedEstimator {
    pub fn new(name: impl Into<String>, params: TailParams) -> Self {
        Self {
            name: name.into(),
            params,
        }
    }
}

impl Estimator for FixedEstimator {
    fn name(&self) -> &str {
        &self.name
    }

    fn fit(&self, _data: &BinaryDataset, _ctx: &FitContext) -> Result<Fit, EstimateError> {
        Ok(Fit {
            params: self.params,
            diagnostics: FitDiagnostics {
                criterion: 0.0,
                evaluations: 0,
                interval: None,
                flat: false,
                relaxed: false,
                clamped: false,
                probability_residual: None,
            },
        })
    }
}
