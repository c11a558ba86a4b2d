//! Bounded multi-start Nelder–Mead with rejection of infeasible points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::BinaryDataset;
use crate::distributions::ModelKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("no feasible point among {evaluations} evaluations")]
    NoFeasiblePoint { evaluations: usize },
    #[error("invalid search box: {0}")]
    InvalidBox(String),
}

/// Axis-aligned box in search coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, OptimError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(OptimError::InvalidBox("bounds must be non-empty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(OptimError::InvalidBox(format!("{lo:?} / {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Shape in [0.01, 5] (GPD) or [0.05, 10] (Weibull); scale in
    /// [min(0.01, 10⁻³·s̃₁), 10·s̃_latest], searched on the log scale.
    pub fn default_for(model: ModelKind, data: &BinaryDataset) -> Self {
        let first = data.batches.first().map_or(1.0, |b| b.s_curr);
        let latest = data.latest().map_or(1.0, |b| b.s_curr);
        let scale_lo = 0.01f64.min(1e-3 * first).ln();
        let scale_hi = (10.0 * latest).ln();
        let (shape_lo, shape_hi) = match model {
            ModelKind::Gpd => (0.01, 5.0),
            ModelKind::Weibull => (0.05, 10.0),
        };
        Self {
            lo: vec![shape_lo, scale_lo],
            hi: vec![shape_hi, scale_hi],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| if v.is_nan() { 0.5 * (l + h) } else { v.clamp(*l, *h) })
            .collect()
    }

    fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const STARTS: usize = 4;

struct Evaluator<F, G> {
    objective: F,
    feasibility: G,
    evals: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64, G: Fn(&[f64]) -> bool> Evaluator<F, G> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        if !(self.feasibility)(x) {
            return f64::INFINITY;
        }
        let v = (self.objective)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v.is_finite() && self.best.as_ref().is_none_or(|(bx, bv)| better(v, x, *bv, bx)) {
            self.best = Some((x.to_vec(), v));
        }
        v
    }
}

/// Minimizes `objective` over the feasible part of `bounds` within `budget`
/// evaluations.
///
/// A quarter of the budget goes to a seeded Latin-hypercube sample (plus the
/// supplied `starts`); Nelder–Mead then runs from the best distinct feasible
/// points with the remaining budget. Infeasible or non-finite points count as
/// +∞. Equal values are resolved towards the lexicographically smaller point.
pub fn derivative_free_minimize(
    objective: impl FnMut(&[f64]) -> f64,
    feasibility: impl Fn(&[f64]) -> bool,
    bounds: &SearchBox,
    budget: usize,
    seed: u64,
    starts: &[Vec<f64>],
) -> Result<Minimum, OptimError> {
    if budget == 0 {
        return Err(OptimError::InvalidBox("budget must be at least 1".into()));
    }
    let dim = bounds.dim();
    let mut ev = Evaluator {
        objective,
        feasibility,
        evals: 0,
        best: None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_sample = (budget / 4).max(1);
    let mut pool: Vec<(Vec<f64>, f64)> = Vec::new();
    for s in starts.iter().take(n_sample) {
        let x = bounds.clamp(s);
        let v = ev.eval(&x);
        pool.push((x, v));
    }
    let n_lhs = n_sample.saturating_sub(pool.len());
    if n_lhs > 0 {
        let strata: Vec<Vec<usize>> = (0..dim)
            .map(|_| {
                let mut idx: Vec<usize> = (0..n_lhs).collect();
                for i in (1..n_lhs).rev() {
                    let j = rng.random_range(0..=i);
                    idx.swap(i, j);
                }
                idx
            })
            .collect();
        for i in 0..n_lhs {
            let x: Vec<f64> = (0..dim)
                .map(|d| {
                    let u = (strata[d][i] as f64 + rng.random::<f64>()) / n_lhs as f64;
                    bounds.lo[d] + u * bounds.width(d)
                })
                .collect();
            let v = ev.eval(&x);
            pool.push((x, v));
        }
    }
    if ev.best.is_none() {
        return Err(OptimError::NoFeasiblePoint { evaluations: ev.evals });
    }

    pool.retain(|(_, v)| v.is_finite());
    pool.sort_by(|(xa, va), (xb, vb)| va.total_cmp(vb).then_with(|| lex(xa, xb)));
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for (x, _) in &pool {
        let distinct = chosen.iter().all(|c| {
            c.iter()
                .zip(x)
                .enumerate()
                .any(|(d, (a, b))| (a - b).abs() > 0.02 * bounds.width(d).max(1e-12))
        });
        if distinct {
            chosen.push(x.clone());
        }
        if chosen.len() == STARTS {
            break;
        }
    }

    for (i, start) in chosen.iter().enumerate() {
        let remaining = budget.saturating_sub(ev.evals);
        if remaining <= dim + 1 {
            break;
        }
        let limit = ev.evals + remaining / (chosen.len() - i);
        nelder_mead(&mut ev, start, bounds, limit);
    }

    let (point, value) = ev.best.expect("feasible point recorded");
    Ok(Minimum {
        point,
        value,
        evaluations: ev.evals,
    })
}

fn better(v: f64, x: &[f64], bv: f64, bx: &[f64]) -> bool {
    v < bv || (v == bv && lex(x, bx).is_lt())
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn nelder_mead<F: FnMut(&[f64]) -> f64, G: Fn(&[f64]) -> bool>(
    ev: &mut Evaluator<F, G>,
    start: &[f64],
    bounds: &SearchBox,
    limit: usize,
) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = ev.eval(start);
    simplex.push((start.to_vec(), v0));
    for d in 0..n {
        let mut x = start.to_vec();
        let step = 0.05 * bounds.width(d);
        x[d] = if x[d] + step <= bounds.hi[d] { x[d] + step } else { x[d] - step };
        let x = bounds.clamp(&x);
        let v = ev.eval(&x);
        simplex.push((x, v));
    }
    while ev.evals + 2 <= limit {
        simplex.sort_by(|(xa, va), (xb, vb)| va.total_cmp(vb).then_with(|| lex(xa, xb)));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < 1e-11 || (spread.is_finite() && spread.abs() <= 1e-15 * (1.0 + simplex[0].1.abs()) && size < 1e-8) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let point = |t: f64| -> Vec<f64> {
            let x: Vec<f64> = (0..n).map(|d| centroid[d] + t * (simplex[n].0[d] - centroid[d])).collect();
            bounds.clamp(&x)
        };
        let xr = point(-1.0);
        let vr = ev.eval(&xr);
        if vr < simplex[0].1 {
            let xe = point(-2.0);
            let ve = ev.eval(&xe);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let (xc, vc) = if vr < simplex[n].1 {
                let x = point(-0.5);
                let v = ev.eval(&x);
                (x, v)
            } else {
                let x = point(0.5);
                let v = ev.eval(&x);
                (x, v)
            };
            if vc < simplex[n].1.min(vr) {
                simplex[n] = (xc, vc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if ev.evals >= limit {
                        return;
                    }
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let v = ev.eval(&x);
                    *entry = (x, v);
                }
            }
        }
    }
}
