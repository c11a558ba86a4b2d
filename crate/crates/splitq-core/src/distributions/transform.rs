use serde::{Deserialize, Serialize};

use super::{gpd_survival, DistributionError, GpdParams};

/// Shape of the map L applied to the base GPD cdf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransformKind {
    Exponential { lambda: f64, alpha: f64 },
    Logarithmic { alpha: f64 },
    Root,
    Fraction { alpha: f64 },
}

/// Survival W̄(x) = 1 − L(G(x)) built on a base GPD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpdTransform {
    kind: TransformKind,
    base: GpdParams,
}

impl GpdTransform {
    pub fn new(kind: TransformKind, base: GpdParams) -> Result<Self, DistributionError> {
        let bad = |name, value, reason| Err(DistributionError::InvalidParameter { name, value, reason });
        match kind {
            TransformKind::Exponential { lambda, alpha } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad("lambda", lambda, "must be > 0");
                }
                if !(0.0..=1.0).contains(&alpha) {
                    return bad("alpha", alpha, "must lie in [0, 1]");
                }
            }
            TransformKind::Logarithmic { alpha } | TransformKind::Fraction { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad("alpha", alpha, "must be > 0");
                }
            }
            TransformKind::Root => {}
        }
        Ok(Self { kind, base })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn base(&self) -> GpdParams {
        self.base
    }

    /// The map L on [0, 1], with L(0) = 0 and L(1) = 1.
    pub fn link(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u == 0.0 {
            return 0.0;
        }
        match self.kind {
            TransformKind::Exponential { lambda, alpha } => {
                (-lambda * u.powf(alpha)).exp_m1() / (-lambda).exp_m1()
            }
            TransformKind::Logarithmic { alpha } => (alpha * u).ln_1p() / alpha.ln_1p(),
            TransformKind::Root => ((u + 1.0).sqrt() - 1.0) / (std::f64::consts::SQRT_2 - 1.0),
            TransformKind::Fraction { alpha } => (alpha + 1.0) * u / (u + alpha),
        }
    }
}

pub fn transform_survival(x: f64, t: &GpdTransform) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let g = 1.0 - gpd_survival(x, &t.base);
    (1.0 - t.link(g)).clamp(0.0, 1.0)
}

/// Largest violation of (−1)^n Δ_h^n f(x) ≥ 0 over the grid and orders 0..=max_order.
pub fn completely_monotone_violation(f: impl Fn(f64) -> f64, xs: &[f64], h: f64, max_order: usize) -> f64 {
    let mut worst = 0.0f64;
    for &x in xs {
        let values: Vec<f64> = (0..=max_order).map(|k| f(x + k as f64 * h)).collect();
        for n in 0..=max_order {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for (k, v) in values.iter().take(n + 1).enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * v;
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            worst = worst.max(-acc);
        }
    }
    worst
}
