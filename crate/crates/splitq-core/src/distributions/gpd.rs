use serde::{Deserialize, Serialize};

use super::{check_positive, check_probability, DistributionError};

/// Generalized Pareto law of R̃ with tail index `c > 0` and scale `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGpd")]
pub struct GpdParams {
    c: f64,
    a: f64,
}

#[derive(Deserialize)]
struct RawGpd {
    c: f64,
    a: f64,
}

impl TryFrom<RawGpd> for GpdParams {
    type Error = DistributionError;
    fn try_from(raw: RawGpd) -> Result<Self, Self::Error> {
        GpdParams::new(raw.c, raw.a)
    }
}

impl GpdParams {
    pub fn new(c: f64, a: f64) -> Result<Self, DistributionError> {
        check_positive("c", c)?;
        check_positive("a", a)?;
        Ok(Self { c, a })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn survival(&self, x: f64) -> f64 {
        gpd_survival(x, self)
    }

    pub fn quantile(&self, q: f64) -> Result<f64, DistributionError> {
        gpd_quantile(q, self)
    }

    pub fn condition(&self, s: f64) -> GpdParams {
        gpd_condition(self, s)
    }

    /// Upper quantile transform without domain checks, `u` in [0, 1).
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        (self.a / self.c) * (-self.c * (-u).ln_1p()).exp_m1()
    }
}

/// Survival (1 + c·x/a)^(−1/c); equals 1 for x ≤ 0.
pub fn gpd_survival(x: f64, p: &GpdParams) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (-(p.c * x / p.a).ln_1p() / p.c).exp()
}

/// The value x with cdf(x) = q.
pub fn gpd_quantile(q: f64, p: &GpdParams) -> Result<f64, DistributionError> {
    check_probability("q", q)?;
    Ok(p.quantile_unchecked(q))
}

/// Law of R̃ − s given R̃ > s: GPD(c, a + c·s).
pub fn gpd_condition(p: &GpdParams, s: f64) -> GpdParams {
    GpdParams {
        c: p.c,
        a: p.a + p.c * s.max(0.0),
    }
}

/// Cdf of the original strength R = 1/R̃.
pub fn inverted_gpd_cdf(x: f64, p: &GpdParams) -> Result<f64, DistributionError> {
    if !(x > 0.0) {
        return Err(DistributionError::Domain {
            what: "x",
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(gpd_survival(1.0 / x, p))
}
