use serde::{Deserialize, Serialize};

use crate::CampaignError;

/// Mean allowable stress against introduced flaw diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct AbatementTable {
    /// (diameter mm, stress MPa), diameter increasing, stress strictly decreasing.
    points: Vec<(f64, f64)>,
    /// Where the curve came from; stored verbatim.
    provenance: Option<String>,
}

#[derive(Deserialize)]
struct RawTable {
    points: Vec<(f64, f64)>,
    #[serde(default)]
    provenance: Option<String>,
}

impl TryFrom<RawTable> for AbatementTable {
    type Error = CampaignError;
    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        AbatementTable::new(raw.points, raw.provenance)
    }
}

impl AbatementTable {
    pub fn new(points: Vec<(f64, f64)>, provenance: Option<String>) -> Result<Self, CampaignError> {
        let bad = |m: String| CampaignError::Abatement(m);
        if points.len() < 2 {
            return Err(bad(format!("at least 2 points required, got {}", points.len())));
        }
        if points.iter().any(|(d, s)| !d.is_finite() || !s.is_finite() || *d < 0.0) {
            return Err(bad("diameters must be finite and non-negative, stresses finite".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(bad(format!("diameters must increase: {} then {}", w[0].0, w[1].0)));
            }
            if !(w[1].1 < w[0].1) {
                return Err(bad(format!("stress must strictly decrease: {} then {}", w[0].1, w[1].1)));
            }
        }
        Ok(Self { points, provenance })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// (lowest, highest) stress covered.
    pub fn stress_range(&self) -> (f64, f64) {
        (self.points[self.points.len() - 1].1, self.points[0].1)
    }

    /// Flaw diameter whose mean allowable stress equals `stress`.
    pub fn flaw_for(&self, stress: f64) -> Result<f64, CampaignError> {
        let (lo, hi) = self.stress_range();
        if !(stress >= lo && stress <= hi) {
            return Err(CampaignError::OutOfRange { stress, lo, hi });
        }
        let w = self
            .points
            .windows(2)
            .find(|w| stress <= w[0].1 && stress >= w[1].1)
            .expect("stress inside the covered range");
        let ((d0, s0), (d1, s1)) = (w[0], w[1]);
        Ok(d0 + (d1 - d0) * (s0 - stress) / (s0 - s1))
    }
}

/// Flaw diameter for a recommended stress; fails with the valid range.
pub fn recommend_flaw(table: &AbatementTable, target_stress: f64) -> Result<f64, CampaignError> {
    table.flaw_for(target_stress)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> AbatementTable {
        AbatementTable::new(vec![(0.0, 500.0), (1.8, 200.0)], None).unwrap()
    }

    #[test]
    fn interpolation_examples() {
        let t = table();
        assert!((recommend_flaw(&t, 350.0).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(recommend_flaw(&t, 500.0).unwrap(), 0.0);
        assert!((recommend_flaw(&t, 200.0).unwrap() - 1.8).abs() < 1e-12);
        let err = recommend_flaw(&t, 100.0).unwrap_err().to_string();
        assert!(err.contains("200") && err.contains("500"), "{err}");
    }

    #[test]
    fn piecewise() {
        let t = AbatementTable::new(vec![(0.0, 500.0), (1.0, 300.0), (3.0, 100.0)], Some("bench".into())).unwrap();
        assert!((t.flaw_for(400.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((t.flaw_for(200.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(t.flaw_for(300.0).unwrap(), 1.0);
        assert_eq!(t.provenance(), Some("bench"));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(AbatementTable::new(vec![(0.0, 500.0)], None).is_err());
        assert!(AbatementTable::new(vec![(0.0, 500.0), (1.0, 500.0)], None).is_err());
        assert!(AbatementTable::new(vec![(1.0, 500.0), (0.5, 200.0)], None).is_err());
        let json = r#"{"points": [[0, 200], [1, 300]]}"#;
        assert!(serde_json::from_str::<AbatementTable>(json).is_err());
    }
}
