use serde::{Deserialize, Serialize};

use super::{solve, BinaryDataset, EstimateError, Estimator, Fit, FitContext, FitDiagnostics, Problem, PROB_EPS};
use crate::distributions::TailParams;

/// Divergence between the empirical and model Bernoulli laws of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceKind {
    Kl,
    Hellinger,
    L1,
}

impl DivergenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DivergenceKind::Kl => "kl",
            DivergenceKind::Hellinger => "hellinger",
            DivergenceKind::L1 => "l1",
        }
    }
}

/// D(Bernoulli(p̂) ‖ Bernoulli(π)).
pub fn divergence(kind: DivergenceKind, phat: f64, pi: f64) -> f64 {
    match kind {
        DivergenceKind::Kl => {
            let pi = pi.clamp(PROB_EPS, 1.0 - PROB_EPS);
            let term = |p: f64, q: f64| if p > 0.0 { p * (p / q).ln() } else { 0.0 };
            (term(phat, pi) + term(1.0 - phat, 1.0 - pi)).max(0.0)
        }
        DivergenceKind::Hellinger => {
            (phat.sqrt() - pi.sqrt()).powi(2) + ((1.0 - phat).sqrt() - (1.0 - pi).sqrt()).powi(2)
        }
        DivergenceKind::L1 => (phat - pi).abs() + ((1.0 - phat) - (1.0 - pi)).abs(),
    }
}

fn total(kind: DivergenceKind, params: &TailParams, data: &BinaryDataset) -> f64 {
    data.batches
        .iter()
        .map(|b| divergence(kind, b.phat(), b.model_prob(params)))
        .sum()
}

/// Minimizer of the summed per-batch divergence.
pub fn divergence_fit(data: &BinaryDataset, kind: DivergenceKind, ctx: &FitContext) -> Result<Fit, EstimateError> {
    if data.batches.iter().all(|b| b.is_degenerate()) {
        return Err(EstimateError::NonIdentifiable);
    }
    let mean_k = data.total_trials() as f64 / data.len() as f64;
    let criterion = |p: &TailParams| total(kind, p, data);
    let problem = Problem {
        criterion: &criterion,
        feasible: &|_| true,
        scale: 1.0 / mean_k,
        flat_tolerance: 1.0,
    };
    let sol = solve(&problem, data, ctx)?;
    Ok(Fit {
        params: sol.params,
        diagnostics: FitDiagnostics {
            criterion: sol.criterion,
            evaluations: sol.evaluations,
            interval: None,
            flat: sol.flat,
            relaxed: false,
            clamped: false,
            probability_residual: None,
        },
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DivergenceEstimator(pub DivergenceKind);

impl Estimator for DivergenceEstimator {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn fit(&self, data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError> {
        divergence_fit(data, self.0, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::BinaryBatch;

    const KINDS: [DivergenceKind; 3] = [DivergenceKind::Kl, DivergenceKind::Hellinger, DivergenceKind::L1];

    #[test]
    fn zero_iff_equal() {
        for kind in KINDS {
            assert!(divergence(kind, 0.3, 0.3).abs() < 1e-15);
            assert!(divergence(kind, 0.0, 0.0).abs() < 1e-11);
            assert!(divergence(kind, 0.3, 0.5) > 0.0);
        }
        assert!((divergence(DivergenceKind::L1, 0.2, 0.5) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_batch_argmin_agrees() {
        let data = BinaryDataset::new(vec![BinaryBatch::new(0.0, 3.0, 50, 12).unwrap()]).unwrap();
        let init = TailParams::gpd(1.0, 1.0).unwrap();
        for kind in KINDS {
            let fit = divergence_fit(&data, kind, &FitContext::new(init)).unwrap();
            let pi = data.batches[0].model_prob(&fit.params);
            let tol = if kind == DivergenceKind::L1 { 1e-6 } else { 1e-4 };
            assert!((pi - 0.24).abs() < tol, "{kind:?}: {pi}");
            assert!(fit.diagnostics.criterion < 1e-6);
        }
    }
}
