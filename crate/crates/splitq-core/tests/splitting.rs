use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitq_core::distributions::{ModelKind, TailParams};
use splitq_core::estimators::{EstimatorRegistry, FixedEstimator};
use splitq_core::simulation::{sample_truncated, BernoulliOracle, TruncatedOracle};
use splitq_core::splitting::{run_splitting, LadderConfig, TrialOracle, TrialRequest};

fn truth() -> TailParams {
    TailParams::gpd(0.8, 1.5).unwrap()
}

fn config(k: usize, seed: u64) -> LadderConfig {
    let p = 10f64.powf(-0.6);
    let mut c = LadderConfig::new(1e-3, p, k, truth().quantile(1.0 - p).unwrap());
    c.seed = seed;
    c
}

#[test]
fn seeded_runs_are_bit_reproducible() {
    let reg = EstimatorRegistry::builtin();
    for name in ["enhanced", "mle"] {
        let est = reg.get(name).unwrap();
        let run = |seed| {
            let mut o = BernoulliOracle::new(truth(), ChaCha8Rng::seed_from_u64(seed));
            run_splitting(&config(50, seed), ModelKind::Gpd, &mut o, est.as_ref()).unwrap()
        };
        assert_eq!(run(7).to_canonical_json(), run(7).to_canonical_json());
        assert_ne!(run(7).to_canonical_json(), run(8).to_canonical_json());
    }
}

#[test]
fn levels_increase_along_the_ladder() {
    let reg = EstimatorRegistry::builtin();
    let est = reg.get("enhanced").unwrap();
    for seed in 0..20 {
        let mut o = BernoulliOracle::new(truth(), ChaCha8Rng::seed_from_u64(seed));
        let ladder = run_splitting(&config(50, seed), ModelKind::Gpd, &mut o, est.as_ref()).unwrap();
        assert_eq!(ladder.levels.len(), ladder.m);
        assert!(ladder.levels.windows(2).all(|w| w[1] > w[0]), "{:?}", ladder.levels);
        assert_eq!(ladder.estimate, ladder.levels.last().copied());
    }
}

#[test]
fn truncated_draws_match_conditional_law() {
    let t = truth();
    let s = 5.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    let mut xs: Vec<f64> = (0..n).map(|_| sample_truncated(&t, s, rng.random())).collect();
    xs.sort_by(f64::total_cmp);
    let cdf = |x: f64| 1.0 - t.conditional_survival(s, x);
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS {ks}");
    assert!(xs[0] >= s);
}

#[test]
fn bernoulli_and_truncated_oracles_agree() {
    let t = truth();
    let req = TrialRequest {
        stage: 2,
        level: 9.0,
        prev_level: 3.0,
        count: 10_000,
    };
    let pi = t.conditional_survival(req.prev_level, req.level);
    let mut direct = BernoulliOracle::new(t, ChaCha8Rng::seed_from_u64(1));
    let mut thresh = TruncatedOracle::new(t, ChaCha8Rng::seed_from_u64(2));
    let count = |y: Vec<u8>| y.iter().filter(|&&v| v == 1).count() as f64 / req.count as f64;
    let (p1, p2) = (count(direct.trials(&req)), count(thresh.trials(&req)));
    let pooled = (p1 + p2) / 2.0;
    let z = (p1 - p2) / (2.0 * pooled * (1.0 - pooled) / req.count as f64).sqrt();
    assert!(z.abs() < 3.0, "z = {z}");
    let band = 4.0 * (pi * (1.0 - pi) / req.count as f64).sqrt();
    assert!((p1 - pi).abs() < band && (p2 - pi).abs() < band);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_fits_telescope(c in 0.2f64..2.0, a in 0.5f64..5.0, p in 0.1f64..0.5, m in 2usize..7) {
        let t = TailParams::gpd(c, a).unwrap();
        let s1 = t.quantile(1.0 - p).unwrap();
        let mut cfg = LadderConfig::new(p.powi(m as i32) * 1.0001, p, 1000, s1);
        cfg.m = Some(m);
        let est = FixedEstimator::new("exact", t);
        let mut oracle = |req: &TrialRequest| {
            let f = (t.conditional_survival(req.prev_level, req.level) * req.count as f64).round() as usize;
            (0..req.count).map(|i| u8::from(i < f)).collect::<Vec<u8>>()
        };
        let ladder = run_splitting(&cfg, ModelKind::Gpd, &mut oracle, &est).unwrap();
        let want = t.quantile(1.0 - t.survival(s1) * p.powi(m as i32 - 1)).unwrap();
        let got = ladder.estimate.unwrap();
        prop_assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }
}
