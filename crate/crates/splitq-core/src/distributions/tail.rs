use std::fmt;

use serde::{Deserialize, Serialize};

use super::{gpd_condition, gpd_survival, DistributionError, GpdParams, WeibullParams};

/// Conditional tail model used by the splitting ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gpd,
    Weibull,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Gpd => f.write_str("gpd"),
            ModelKind::Weibull => f.write_str("weibull"),
        }
    }
}

/// Parameters of either tail model, tagged by family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TailParams {
    Gpd(GpdParams),
    Weibull(WeibullParams),
}

impl TailParams {
    pub fn gpd(c: f64, a: f64) -> Result<Self, DistributionError> {
        GpdParams::new(c, a).map(TailParams::Gpd)
    }

    pub fn weibull(alpha: f64, beta: f64) -> Result<Self, DistributionError> {
        WeibullParams::new(alpha, beta).map(TailParams::Weibull)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            TailParams::Gpd(_) => ModelKind::Gpd,
            TailParams::Weibull(_) => ModelKind::Weibull,
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match self {
            TailParams::Gpd(p) => gpd_survival(x, p),
            TailParams::Weibull(p) => (-p.hazard(x)).exp(),
        }
    }

    /// P(R̃ > s_curr | R̃ > s_prev) for s_curr ≥ s_prev ≥ 0.
    pub fn conditional_survival(&self, s_prev: f64, s_curr: f64) -> f64 {
        match self {
            TailParams::Gpd(p) => gpd_survival(s_curr - s_prev, &gpd_condition(p, s_prev)),
            TailParams::Weibull(p) => (p.hazard(s_prev) - p.hazard(s_curr)).exp().min(1.0),
        }
    }

    /// The gap x ≥ 0 with P(R̃ > s_prev + x | R̃ > s_prev) = 1 − u, for u in [0, 1).
    pub fn conditional_gap_quantile(&self, s_prev: f64, u: f64) -> f64 {
        match self {
            TailParams::Gpd(p) => gpd_condition(p, s_prev).quantile_unchecked(u),
            TailParams::Weibull(p) => {
                let h = p.hazard(s_prev) - (-u).ln_1p();
                (p.alpha() * h.powf(1.0 / p.beta()) - s_prev).max(0.0)
            }
        }
    }

    /// Upper quantile of the unconditional law.
    pub fn quantile(&self, u: f64) -> Result<f64, DistributionError> {
        super::check_probability("q", u)?;
        Ok(self.conditional_gap_quantile(0.0, u))
    }

    /// Search coordinates (shape, log scale).
    pub fn to_search(&self) -> [f64; 2] {
        match self {
            TailParams::Gpd(p) => [p.c(), p.a().ln()],
            TailParams::Weibull(p) => [p.beta(), p.alpha().ln()],
        }
    }

    pub fn from_search(kind: ModelKind, x: &[f64]) -> Result<Self, DistributionError> {
        match kind {
            ModelKind::Gpd => TailParams::gpd(x[0], x[1].exp()),
            ModelKind::Weibull => TailParams::weibull(x[1].exp(), x[0]),
        }
    }

    /// Member of the one-parameter sub-family (shape 1, scale free) whose
    /// survival at `s` equals `prob`.
    pub fn unit_shape_through(kind: ModelKind, s: f64, prob: f64) -> Result<Self, DistributionError> {
        super::check_probability("prob", prob)?;
        match kind {
            ModelKind::Gpd => TailParams::gpd(1.0, s * prob / (1.0 - prob)),
            ModelKind::Weibull => TailParams::weibull(s / -prob.ln(), 1.0),
        }
    }
}
