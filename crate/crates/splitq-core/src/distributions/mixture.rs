use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use statrs::function::gamma::ln_gamma;

use super::{gpd_survival, DistributionError, GpdParams};

const MAX_DEPTH: usize = 30;
const MAX_PANELS: usize = 20_000;

/// Absolute difference between the GPD survival at `x` and the numerically
/// integrated Laplace transform ∫ e^(−xy) v(y) dy of its Gamma(1/c, rate a/c)
/// mixing density, evaluated on the log scale y = e^s where the integrand is
/// smooth and unimodal.
pub fn gamma_mixture_check(p: &GpdParams, x: f64, n_nodes: usize) -> Result<f64, DistributionError> {
    if n_nodes < 32 {
        return Err(DistributionError::InvalidParameter {
            name: "n_nodes",
            value: n_nodes as f64,
            reason: "at least 32 nodes required",
        });
    }
    if !(x >= 0.0) {
        return Err(DistributionError::Domain {
            what: "x",
            value: x,
            domain: "[0, inf)",
        });
    }
    let k = 1.0 / p.c();
    let rate = p.a() / p.c();
    let log_norm = k * rate.ln() - ln_gamma(k);
    let integrand = |s: f64| (log_norm + k * s - x * s.exp() - rate * s.exp()).exp();
    let mode = (k / (rate + x)).ln();
    let lo = mode - (45.0 / k + 5.0);
    let hi = mode + (2.0 + 90.0 / k).ln() + 2.0;
    let rule = GaussLegendre::new(NonZeroUsize::new(n_nodes).expect("n_nodes >= 32"));
    let mut panels = 0usize;
    let pieces = 16;
    let width = (hi - lo) / pieces as f64;
    let mut integral = 0.0;
    let mut err = 0.0;
    for i in 0..pieces {
        let (a, b) = (lo + i as f64 * width, lo + (i + 1) as f64 * width);
        let whole = rule.integrate(a, b, integrand);
        let (v, e) = adaptive(&rule, &integrand, a, b, whole, 1e-15, MAX_DEPTH, &mut panels);
        integral += v;
        err += e;
    }
    let residual = (integral - gpd_survival(x, p)).abs();
    if !(err <= 1e-11) || panels >= MAX_PANELS {
        return Err(DistributionError::Quadrature { residual });
    }
    Ok(residual)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    rule: &GaussLegendre,
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    panels: &mut usize,
) -> (f64, f64) {
    *panels += 1;
    let mid = 0.5 * (lo + hi);
    let left = rule.integrate(lo, mid, f);
    let right = rule.integrate(mid, hi, f);
    let diff = (left + right - whole).abs();
    if diff <= tol || depth == 0 || *panels >= MAX_PANELS || !diff.is_finite() {
        return (left + right, if diff.is_finite() { diff } else { f64::INFINITY });
    }
    let (l, el) = adaptive(rule, f, lo, mid, left, 0.5 * tol, depth - 1, panels);
    let (r, er) = adaptive(rule, f, mid, hi, right, 0.5 * tol, depth - 1, panels);
    (l + r, el + er)
}
