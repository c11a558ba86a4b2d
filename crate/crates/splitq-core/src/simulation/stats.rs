use serde::{Deserialize, Serialize};

/// (estimate − truth)/truth.
pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth) / truth
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; absent for a single value.
    pub std: Option<f64>,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

fn type7(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl SummaryStats {
    /// None for an empty input. Non-finite values are kept, so a single
    /// infinite estimate shows up in the mean.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut xs = values.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Some(Self {
            n,
            mean,
            std,
            min: xs[0],
            q25: type7(&xs, 0.25),
            median: type7(&xs, 0.5),
            q75: type7(&xs, 0.75),
            max: xs[n - 1],
        })
    }
}
