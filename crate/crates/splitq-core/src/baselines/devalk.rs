use serde::{Deserialize, Serialize};

use super::BaselineError;

/// The normalizing function g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Slope {
    /// g(x) = c·x.
    Linear { c: f64 },
    /// g(x) = value.
    Constant { value: f64 },
    /// g(x) = ĉ·x with ĉ the Hill estimate over the top l_n observations.
    Hill,
    /// g(x) = value estimated by the Weibull tail coefficient over the top l_n observations.
    Wtc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeValkConfig {
    /// Intermediate order count; ⌊n/10⌋ when absent.
    #[serde(default)]
    pub l_n: Option<usize>,
    pub theta: f64,
    pub g: Slope,
}

impl DeValkConfig {
    pub fn l_for(&self, n: usize) -> usize {
        self.l_n.unwrap_or(n / 10)
    }
}

/// ϑ_{k,n} = Σ_{j=k}^{n} 1/j.
pub fn devalk_theta_sum(k: usize, n: usize) -> f64 {
    assert!(1 <= k && k <= n, "need 1 <= k <= n");
    (k..=n).rev().map(|j| 1.0 / j as f64).sum()
}

/// h_θ(λ) = (λ^θ − 1)/θ, with the log at θ = 0.
pub fn devalk_h(theta: f64, lambda: f64) -> f64 {
    let l = lambda.ln();
    if theta == 0.0 {
        l
    } else {
        (theta * l).exp_m1() / theta
    }
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Hill estimate mean(log X_{n−i+1:n}, i ≤ l) − log X_{n−l:n}.
pub fn hill_slope(sample: &[f64], l: usize) -> Result<f64, BaselineError> {
    let xs = sorted(sample);
    let n = xs.len();
    check_l(n, l)?;
    let base = xs[n - l - 1];
    if base <= 0.0 {
        return Err(BaselineError::NonPositiveOrderStatistic { value: base });
    }
    Ok(xs[n - l..].iter().map(|x| x.ln()).sum::<f64>() / l as f64 - base.ln())
}

/// Weibull tail coefficient estimate of 1/β from the top l observations.
pub fn weibull_tail_coefficient(sample: &[f64], l: usize) -> Result<f64, BaselineError> {
    let xs = sorted(sample);
    let n = xs.len();
    check_l(n, l)?;
    let base = xs[n - l - 1];
    if base <= 0.0 {
        return Err(BaselineError::NonPositiveOrderStatistic { value: base });
    }
    let nf = n as f64;
    let ll = (nf / l as f64).ln().ln();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..=l {
        num += xs[n - i].ln() - base.ln();
        den += (nf / i as f64).ln().ln() - ll;
    }
    Ok(num / den)
}

fn check_l(n: usize, l: usize) -> Result<(), BaselineError> {
    if l == 0 || n < l + 1 {
        return Err(BaselineError::InsufficientData(format!("l_n = {l} needs 1 <= l_n < n = {n}")));
    }
    Ok(())
}

/// X_{n−l:n} · exp{ g(ϑ_{l,n}) · h_θ(z / ϑ_{l+1,n}) } with z = −log(target
/// probability) and ascending order statistics.
pub fn devalk_quantile(sample: &[f64], z: f64, config: &DeValkConfig) -> Result<f64, BaselineError> {
    let n = sample.len();
    let l = config.l_for(n);
    check_l(n, l)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(BaselineError::InvalidConfig(format!("z = {z} must be positive")));
    }
    let xs = sorted(sample);
    let base = xs[n - l - 1];
    if base <= 0.0 {
        return Err(BaselineError::NonPositiveOrderStatistic { value: base });
    }
    let t_l = devalk_theta_sum(l, n);
    let t_l1 = devalk_theta_sum(l + 1, n);
    let g = match config.g {
        Slope::Linear { c } => c * t_l,
        Slope::Constant { value } => value,
        Slope::Hill => hill_slope(&xs, l)? * t_l,
        Slope::Wtc => weibull_tail_coefficient(&xs, l)?,
    };
    Ok(base * (g * devalk_h(config.theta, z / t_l1)).exp())
}
