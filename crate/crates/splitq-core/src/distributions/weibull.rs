use serde::{Deserialize, Serialize};

use super::{check_positive, check_probability, DistributionError};

/// Weibull law of R̃ with scale `alpha` and shape `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeibull")]
pub struct WeibullParams {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawWeibull {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawWeibull> for WeibullParams {
    type Error = DistributionError;
    fn try_from(raw: RawWeibull) -> Result<Self, Self::Error> {
        WeibullParams::new(raw.alpha, raw.beta)
    }
}

impl WeibullParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, DistributionError> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// (x/α)^β, the cumulative hazard.
    pub(crate) fn hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (x / self.alpha).powf(self.beta)
        }
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        self.alpha * (-(-u).ln_1p()).powf(1.0 / self.beta)
    }
}

pub fn weibull_survival(x: f64, p: &WeibullParams) -> f64 {
    (-p.hazard(x)).exp()
}

pub fn weibull_quantile(q: f64, p: &WeibullParams) -> Result<f64, DistributionError> {
    check_probability("q", q)?;
    Ok(p.quantile_unchecked(q))
}

/// P(R̃ > s2 | R̃ > s1) = exp(−(s2/α)^β + (s1/α)^β).
pub fn weibull_conditional_survival(s1: f64, s2: f64, p: &WeibullParams) -> Result<f64, DistributionError> {
    if !(s1 >= 0.0) {
        return Err(DistributionError::Domain {
            what: "s1",
            value: s1,
            domain: "[0, inf)",
        });
    }
    if !(s2 >= s1) {
        return Err(DistributionError::Domain {
            what: "s2",
            value: s2,
            domain: "[s1, inf)",
        });
    }
    if s1 == 0.0 {
        return Ok((-p.hazard(s2)).exp());
    }
    // H(s1) − H(s2) = −H(s1)·((s2/s1)^β − 1), without cancellation for s2 near s1.
    let log_cond = -p.hazard(s1) * (p.beta() * (s2 / s1).ln()).exp_m1();
    if log_cond.is_nan() {
        return Ok((p.hazard(s1) - p.hazard(s2)).exp());
    }
    Ok(log_cond.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wb(alpha: f64, beta: f64) -> WeibullParams {
        WeibullParams::new(alpha, beta).unwrap()
    }

    #[test]
    fn survival_examples() {
        let p = wb(3.0, 0.9);
        assert_eq!(weibull_survival(0.0, &p), 1.0);
        assert!((weibull_survival(3.0, &p) - (-1f64).exp()).abs() < 1e-15);
        // 25.69 is rounded from 25.6873; the rounding alone shifts the survival by 6.5e-4 relative.
        assert!((weibull_survival(25.69, &p) / 1e-3 - 1.0).abs() < 1e-3);
        let exact = weibull_quantile(1.0 - 1e-3, &p).unwrap();
        assert!((weibull_survival(exact, &p) / 1e-3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        for (alpha, beta, want) in [(3.0, 0.9, 25.69), (3.0, 1.5, 10.88), (2.0, 1.5, 7.25)] {
            let q = weibull_quantile(1.0 - 1e-3, &wb(alpha, beta)).unwrap();
            assert!((q - want).abs() < 0.01, "{alpha} {beta}: {q}");
        }
        let p = wb(2.5, 1.7);
        let q = weibull_quantile(1.0 - (-1f64).exp(), &p).unwrap();
        assert!((q - 2.5).abs() < 1e-12);
        assert!(weibull_quantile(1.5, &p).is_err());
    }

    #[test]
    fn conditional_examples() {
        let p = wb(3.0, 0.9);
        assert_eq!(weibull_conditional_survival(4.0, 4.0, &p).unwrap(), 1.0);
        assert!((weibull_conditional_survival(0.0, 7.0, &p).unwrap() - weibull_survival(7.0, &p)).abs() < 1e-15);
        let ratio = (-(10.0f64 / 3.0).powf(0.9)).exp() / (-(5.0f64 / 3.0).powf(0.9)).exp();
        assert!((weibull_conditional_survival(5.0, 10.0, &p).unwrap() - ratio).abs() < 1e-12);
        assert!(weibull_conditional_survival(5.0, 4.0, &p).is_err());
    }
}
