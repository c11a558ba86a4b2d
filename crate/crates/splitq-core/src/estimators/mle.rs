use super::{binary_loglik, solve, BinaryDataset, EstimateError, Estimator, Fit, FitContext, FitDiagnostics, Problem};

/// Maximizer of the Bernoulli-product likelihood over all batches.
pub fn mle_fit(data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError> {
    if data.batches.iter().all(|b| b.is_degenerate()) {
        return Err(EstimateError::NonIdentifiable);
    }
    let criterion = |p: &_| -binary_loglik(p, data).value;
    let problem = Problem {
        criterion: &criterion,
        feasible: &|_| true,
        scale: 1.0,
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
            clamped: binary_loglik(&sol.params, data).clamped,
            probability_residual: None,
        },
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MleEstimator;

impl Estimator for MleEstimator {
    fn name(&self) -> &str {
        "mle"
    }

    fn fit(&self, data: &BinaryDataset, ctx: &FitContext) -> Result<Fit, EstimateError> {
        mle_fit(data, ctx)
    }
}
