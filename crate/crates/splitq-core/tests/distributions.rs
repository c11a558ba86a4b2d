use proptest::prelude::*;
use splitq_core::distributions::{
    gamma_mixture_check, gpd_condition, gpd_quantile, gpd_survival, transform_survival, weibull_conditional_survival,
    weibull_quantile, weibull_survival, GpdParams, GpdTransform, TransformKind, WeibullParams,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn excess_over_threshold_is_gpd(c in 0.05f64..3.0, a in 0.1f64..10.0, s in 0.0f64..50.0, x in 0.0f64..50.0) {
        let g = GpdParams::new(c, a).unwrap();
        let lhs = gpd_survival(x, &gpd_condition(&g, s));
        let rhs = gpd_survival(x + s, &g) / gpd_survival(s, &g);
        prop_assert!(rel(lhs, rhs) < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn conditioning_composes(c in 0.05f64..3.0, a in 0.1f64..10.0, s in 0.0f64..100.0, t in 0.0f64..100.0) {
        let g = GpdParams::new(c, a).unwrap();
        let twice = gpd_condition(&gpd_condition(&g, s), t);
        let once = gpd_condition(&g, s + t);
        prop_assert!(rel(twice.a(), once.a()) < 1e-12 && twice.c() == once.c());
    }

    #[test]
    fn gpd_quantile_round_trips(c in 0.05f64..3.0, a in 0.1f64..10.0, q in 1e-6f64..0.999_999) {
        let g = GpdParams::new(c, a).unwrap();
        let x = gpd_quantile(q, &g).unwrap();
        prop_assert!(rel(1.0 - gpd_survival(x, &g), q) < 1e-9);
    }

    #[test]
    fn weibull_log_identity(alpha in 0.1f64..10.0, beta in 0.2f64..5.0, u in 0.01f64..0.9, ratio in 1.0f64..3.0) {
        let w = WeibullParams::new(alpha, beta).unwrap();
        let s1 = weibull_quantile(u, &w).unwrap();
        let s2 = s1 * ratio;
        let lhs = weibull_conditional_survival(s1, s2, &w).unwrap().ln();
        let rhs = (beta * (s2 / s1).ln()).exp_m1() * weibull_survival(s1, &w).ln();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
    }

    #[test]
    fn weibull_quantile_round_trips(alpha in 0.1f64..10.0, beta in 0.2f64..5.0, q in 1e-6f64..0.999_999) {
        let w = WeibullParams::new(alpha, beta).unwrap();
        let x = weibull_quantile(q, &w).unwrap();
        prop_assert!(rel(weibull_survival(x, &w), 1.0 - q) < 1e-9);
    }

    #[test]
    fn gamma_mixture_reproduces_survival(c in 0.1f64..3.0, a in 0.2f64..10.0, x in 0.0f64..1e3) {
        let r = gamma_mixture_check(&GpdParams::new(c, a).unwrap(), x, 64).unwrap();
        prop_assert!(r < 1e-6, "residual {r}");
    }
}

#[test]
fn transforms_are_survival_functions() {
    let base = GpdParams::new(0.8, 1.5).unwrap();
    for kind in [
        TransformKind::Exponential { lambda: 2.0, alpha: 0.5 },
        TransformKind::Logarithmic { alpha: 0.3 },
        TransformKind::Root,
        TransformKind::Fraction { alpha: 0.4 },
    ] {
        let t = GpdTransform::new(kind, base).unwrap();
        assert_eq!(transform_survival(0.0, &t), 1.0);
        let mut prev = 1.0;
        for i in 1..=1000 {
            let v = transform_survival(i as f64 * 0.5, &t);
            assert!((0.0..=1.0).contains(&v) && v <= prev + 1e-15, "{kind:?} at {i}");
            prev = v;
        }
        assert!(transform_survival(1e12, &t) < 1e-3);
    }
}
