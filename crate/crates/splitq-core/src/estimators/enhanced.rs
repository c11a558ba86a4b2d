use super::{
    backward_residual, confidence_interval_p, probability_residual, solve, BinaryBatch, BinaryDataset, EstimateError,
    Estimator, Fit, FitContext, FitDiagnostics, OptimError, PairMode, Problem,
};
use crate::distributions::TailParams;

/// Sequential criterion: minimize the backward quantile residual of the
/// earlier stages subject to the latest batch's model probability lying in
/// its confidence interval.
pub fn enhanced_fit(data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError> {
    let n = data.len();
    if n < 2 {
        return Err(EstimateError::InsufficientData {
            estimator: "enhanced".into(),
            needed: 2,
            got: n,
        });
    }
    let latest = data.batches[n - 1];
    let interval = confidence_interval_p(&latest, ctx.gamma);
    let previous: &[BinaryBatch] = match ctx.pair_mode {
        PairMode::All => &data.batches[..n - 1],
        PairMode::Latest => &data.batches[n - 2..n - 1],
    };
    let clamped: Vec<f64> = previous
        .iter()
        .map(|b| {
            let eps = 0.5 / b.k as f64;
            b.phat().clamp(eps, 1.0 - eps)
        })
        .collect();
    let residual = |p: &TailParams| -> f64 {
        previous
            .iter()
            .zip(&clamped)
            .map(|(b, &ph)| backward_residual(p, b.s_curr, b.s_prev, ph))
            .sum()
    };
    let gaps: f64 = previous.iter().map(|b| b.s_curr - b.s_prev).sum();
    let feasible = |p: &TailParams| interval.contains(latest.model_prob(p));
    let problem = Problem {
        criterion: &residual,
        feasible: &feasible,
        scale: gaps,
        flat_tolerance: 0.01,
    };
    let (sol, relaxed) = match solve(&problem, data, ctx) {
        Ok(sol) => (sol, false),
        Err(EstimateError::Search(OptimError::NoFeasiblePoint { .. })) => {
            let width = (1.0 / latest.k as f64).max(interval.hi - interval.lo);
            let relaxed = |p: &TailParams| 1e3 * interval.violation(latest.model_prob(p)) / width + residual(p) / gaps;
            let fallback = Problem {
                criterion: &relaxed,
                feasible: &|_| true,
                scale: 1.0,
                flat_tolerance: 0.01,
            };
            (solve(&fallback, data, ctx)?, true)
        }
        Err(e) => return Err(e),
    };
    let prob_res: f64 = previous
        .iter()
        .zip(&clamped)
        .map(|(b, &ph)| probability_residual(&sol.params, b.s_curr, b.s_prev, ph))
        .sum();
    Ok(Fit {
        params: sol.params,
        diagnostics: FitDiagnostics {
            criterion: residual(&sol.params),
            evaluations: sol.evaluations,
            interval: Some(interval),
            flat: sol.flat,
            relaxed,
            clamped: false,
            probability_residual: Some(prob_res),
        },
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnhancedEstimator;

impl Estimator for EnhancedEstimator {
    fn name(&self) -> &str {
        "enhanced"
    }

    fn min_batches(&self) -> usize {
        2
    }

    fn fit(&self, data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError> {
        enhanced_fit(data, ctx)
    }
}
