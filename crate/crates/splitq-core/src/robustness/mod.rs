//! Misspecification neighborhoods around a GPD and goodness-of-fit
//! statistics on complete samples.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::GpdParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error("invalid neighborhood: {0}")]
    InvalidSpec(String),
    #[error("need x >= s >= 0, got s = {s}, x = {x}")]
    Domain { s: f64, x: f64 },
    #[error("neighborhood vacuous at s = {s}: F(s) = {survival} <= eps/w(s) = {slack}")]
    Vacuous { s: f64, survival: f64, slack: f64 },
    #[error("no admissible threshold: {term}")]
    Infeasible { term: String },
    #[error("cdf value {value} at sample point {x} makes the log diverge")]
    LogDivergence { x: f64, value: f64 },
    #[error("empty sample")]
    EmptySample,
}

/// Increasing weight in the neighborhood radius ε/w(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Weight {
    /// w(x) = x^κ
    Power { kappa: f64 },
    /// w(x) = e^{κx}
    Exponential { kappa: f64 },
}

impl Weight {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Power { kappa } => x.powf(kappa),
            Self::Exponential { kappa } => (kappa * x).exp(),
        }
    }

    fn kappa(&self) -> f64 {
        match *self {
            Self::Power { kappa } | Self::Exponential { kappa } => kappa,
        }
    }
}

/// Laws G with sup_x |Ḡ(x) − F̄(x)|·w(x) ≤ ε around the GPD F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub base: GpdParams,
    pub epsilon: f64,
    pub weight: Weight,
    /// Relative-error budget δ for `admissible_threshold`.
    #[serde(default)]
    pub delta_target: Option<f64>,
}

impl NeighborhoodSpec {
    pub fn new(base: GpdParams, epsilon: f64, weight: Weight) -> Result<Self, RobustnessError> {
        let spec = Self {
            base,
            epsilon,
            weight,
            delta_target: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_target = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<(), RobustnessError> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(RobustnessError::InvalidSpec(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        let k = self.weight.kappa();
        if !(k > 0.0 && k.is_finite()) {
            return Err(RobustnessError::InvalidSpec(format!("kappa = {k} must be > 0")));
        }
        if let Some(d) = self.delta_target {
            if !(d > 0.0) {
                return Err(RobustnessError::InvalidSpec(format!("delta = {d} must be > 0")));
            }
        }
        Ok(())
    }

    /// ε/w(t), with 0 at ε = 0 even where w vanishes.
    fn slack(&self, t: f64) -> f64 {
        if self.epsilon == 0.0 {
            0.0
        } else {
            self.epsilon / self.weight.eval(t)
        }
    }

    /// (1 + ct/a)^{1/c}/w(t) = 1/(F̄(t)·w(t)).
    fn tail_term(&self, t: f64) -> f64 {
        let (c, a) = (self.base.c(), self.base.a());
        ((c * t / a).ln_1p() / c).exp() / self.weight.eval(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn check_sx(s: f64, x: f64) -> Result<(), RobustnessError> {
    if !(s >= 0.0 && x >= s && x.is_finite()) {
        return Err(RobustnessError::Domain { s, x });
    }
    Ok(())
}

/// Range of Ḡ(x)/Ḡ(s) over the neighborhood, clamped to [0, 1].
pub fn conditional_bounds(spec: &NeighborhoodSpec, s: f64, x: f64) -> Result<Interval, RobustnessError> {
    spec.validate()?;
    check_sx(s, x)?;
    let fs = spec.base.survival(s);
    let fx = spec.base.survival(x);
    let (es, ex) = (spec.slack(s), spec.slack(x));
    let den_hi = fs - es;
    if !(den_hi > 0.0) {
        return Err(RobustnessError::Vacuous { s, survival: fs, slack: es });
    }
    let lo = ((fx - ex) / (fs + es)).clamp(0.0, 1.0);
    let hi = ((fx + ex) / den_hi).clamp(0.0, 1.0);
    Ok(Interval { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    /// u(s, x)·ε
    pub bound: f64,
    pub u: f64,
    /// False when u·ε > 0.5, where the first-order expansion is unreliable.
    pub first_order_valid: bool,
}

/// First-order relative error of the conditional probability over the
/// neighborhood: u(s,x)·ε with u = (1+cs/a)^{1/c}/w(s) + (1+cx/a)^{1/c}/w(x).
pub fn relative_error_bound(spec: &NeighborhoodSpec, s: f64, x: f64) -> Result<ErrorBound, RobustnessError> {
    spec.validate()?;
    check_sx(s, x)?;
    let u = spec.tail_term(s) + spec.tail_term(x);
    let bound = if spec.epsilon == 0.0 { 0.0 } else { u * spec.epsilon };
    Ok(ErrorBound {
        bound,
        u,
        first_order_valid: bound <= 0.5,
    })
}

/// Smallest s with (1+cs/a)^{1/c}/w(s) ≤ δ/ε − (1+cx/a)^{1/c}/w(x): a
/// geometric scan locates the first admissible point, bisection refines it.
pub fn admissible_threshold(spec: &NeighborhoodSpec, x: f64) -> Result<f64, RobustnessError> {
    spec.validate()?;
    let delta = spec
        .delta_target
        .ok_or_else(|| RobustnessError::InvalidSpec("delta_target is required".into()))?;
    if spec.epsilon == 0.0 {
        return Ok(0.0);
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(RobustnessError::Domain { s: 0.0, x });
    }
    let x_term = spec.tail_term(x);
    let budget = delta / spec.epsilon - x_term;
    if !(budget > 0.0) {
        return Err(RobustnessError::Infeasible {
            term: format!(
                "the x term (1+cx/a)^(1/c)/w(x) = {x_term:.6e} already exceeds delta/eps = {:.6e}",
                delta / spec.epsilon
            ),
        });
    }
    let f = |s: f64| spec.tail_term(s);
    if f(0.0) <= budget {
        return Ok(0.0);
    }
    let unit = (spec.base.a() / spec.base.c()).max(1e-300);
    let mut prev = 0.0;
    let mut s = 1e-9 * unit;
    let mut inf_seen = f64::INFINITY;
    while s <= 1e15 * unit {
        let v = f(s);
        inf_seen = inf_seen.min(v);
        if v <= budget {
            let (mut lo, mut hi) = (prev, s);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) <= budget {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        prev = s;
        s *= 2.0;
    }
    Err(RobustnessError::Infeasible {
        term: format!(
            "the s term (1+cs/a)^(1/c)/w(s) stays above the budget {budget:.6e} (smallest value seen {inf_seen:.6e}); w grows too slowly"
        ),
    })
}

/// CSV grid of bounds for every (s, x) pair with x ≥ s.
pub fn bounds_grid_csv(spec: &NeighborhoodSpec, s_values: &[f64], x_values: &[f64]) -> String {
    let mut out = String::from("s,x,exact,lower,upper,u,bound,first_order_valid\n");
    for &s in s_values {
        for &x in x_values.iter().filter(|&&x| x >= s) {
            let exact = spec.base.survival(x) / spec.base.survival(s);
            let eb = relative_error_bound(spec, s, x).ok();
            let (lo, hi) = match conditional_bounds(spec, s, x) {
                Ok(iv) => (format!("{:.10e}", iv.lo), format!("{:.10e}", iv.hi)),
                Err(_) => ("vacuous".to_string(), "vacuous".to_string()),
            };
            let (u, b, v) = eb.map_or(("n/a".into(), "n/a".into(), "n/a".into()), |e| {
                (format!("{:.10e}", e.u), format!("{:.10e}", e.bound), e.first_order_valid.to_string())
            });
            writeln!(out, "{s},{x},{exact:.10e},{lo},{hi},{u},{b},{v}").unwrap();
        }
    }
    out
}

fn sorted_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<Vec<(f64, f64)>, RobustnessError> {
    if sample.is_empty() {
        return Err(RobustnessError::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs.into_iter().map(|x| (x, cdf(x))).collect())
}

/// W² = Σ (Ĝ(x₍ᵢ₎) − (2i−1)/(2n))² + 1/(12n).
pub fn cvm_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, RobustnessError> {
    let pts = sorted_cdf(sample, cdf)?;
    let n = pts.len() as f64;
    Ok(pts
        .iter()
        .enumerate()
        .map(|(i, &(_, g))| (g - (2.0 * i as f64 + 1.0) / (2.0 * n)).powi(2))
        .sum::<f64>()
        + 1.0 / (12.0 * n))
}

/// A² = −n − (1/n) Σ (2i−1)[log Ĝ(x₍ᵢ₎) + log(1 − Ĝ(x₍ₙ₊₁₋ᵢ₎))].
pub fn ad_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, RobustnessError> {
    let pts = sorted_cdf(sample, cdf)?;
    if let Some(&(x, value)) = pts.iter().find(|(_, g)| !(*g > 0.0 && *g < 1.0)) {
        return Err(RobustnessError::LogDivergence { x, value });
    }
    let n = pts.len();
    let total: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (pts[i].1.ln() + (-pts[n - 1 - i].1).ln_1p()))
        .sum();
    Ok(-(n as f64) - total / n as f64)
}
