use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitq_core::baselines::{
    crm_run, devalk_h, devalk_quantile, staircase_run, staircase_walk, CrmConfig, DeValkConfig, Slope,
    StaircaseConfig, StaircaseModel,
};

fn exponential_oracle(lambda: f64, seed: u64) -> impl FnMut(f64) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move |s: f64| u8::from(rng.random::<f64>() < -(-lambda * s.max(0.0)).exp_m1())
}

#[test]
fn staircase_hovers_around_the_median() {
    let lambda = 0.2;
    let cfg = StaircaseConfig {
        s_ini: 5.0,
        delta: 15.0,
        k: 10_000,
        model: StaircaseModel::Exponential,
    };
    let run = staircase_run(&cfg, &mut exponential_oracle(lambda, 3)).unwrap();
    let mean = run.levels.iter().sum::<f64>() / run.levels.len() as f64;
    let median = std::f64::consts::LN_2 / lambda;
    assert!((mean / median - 1.0).abs() < 0.3, "mean {mean}, median {median}");
}

proptest! {
    #[test]
    fn staircase_levels_sit_on_the_lattice(seed in 0u64..1000, s_ini in 0.0f64..50.0, delta in 0.5f64..20.0) {
        let cfg = StaircaseConfig { s_ini, delta, k: 200, model: StaircaseModel::Exponential };
        let run = staircase_run(&cfg, &mut exponential_oracle(0.2, seed)).unwrap();
        let walk = staircase_walk(s_ini, delta, &run.outcomes);
        prop_assert_eq!(&walk[..200], &run.levels[..]);
        prop_assert_eq!(walk[200], run.next_level);
        for w in run.levels.windows(2) {
            prop_assert!(((w[1] - w[0]).abs() - delta).abs() < 1e-9 * delta.max(s_ini));
        }
        for l in &run.levels {
            let steps = (l - s_ini) / delta;
            prop_assert!((steps - steps.round()).abs() < 1e-6);
        }
    }

    #[test]
    fn devalk_h_increases(theta in -3.0f64..3.0, l1 in 0.01f64..50.0, dl in 1e-3f64..50.0) {
        prop_assert!(devalk_h(theta, l1 + dl) > devalk_h(theta, l1));
    }

    #[test]
    fn devalk_is_scale_equivariant(seed in 0u64..500, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample: Vec<f64> = (0..250).map(|_| rng.random::<f64>().powf(-0.8)).collect();
        let scaled: Vec<f64> = sample.iter().map(|x| x * scale).collect();
        for g in [Slope::Linear { c: 0.8 }, Slope::Hill] {
            let cfg = DeValkConfig { l_n: Some(25), theta: 1.0, g };
            let q = devalk_quantile(&sample, 7.0, &cfg).unwrap();
            let qs = devalk_quantile(&scaled, 7.0, &cfg).unwrap();
            prop_assert!((qs / (q * scale) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn devalk_is_nearly_exact_on_a_pareto_tail() {
    let c = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sample: Vec<f64> = (0..100_000).map(|_| (1.0 - rng.random::<f64>()).powf(-c)).collect();
    let cfg = DeValkConfig {
        l_n: Some(1000),
        theta: 1.0,
        g: Slope::Linear { c },
    };
    let alpha: f64 = 1e-6;
    let q = devalk_quantile(&sample, -alpha.ln(), &cfg).unwrap();
    let truth = alpha.powf(-c);
    assert!((q / truth - 1.0).abs() < 0.05, "{q} vs {truth}");
}

#[test]
fn crm_accuracy_improves_with_batch_size() {
    let lambda = 0.2;
    let alpha: f64 = 1e-3;
    let truth = -(-alpha).ln_1p() / lambda;
    let q1 = truth;
    let q10 = -(-0.1f64).ln_1p() / lambda;
    let levels = CrmConfig::equally_spaced(q1, 2.0 * q10, 10);
    let mut errors = Vec::new();
    for k in [10, 50, 200] {
        let cfg = CrmConfig {
            levels: levels.clone(),
            prior_k: 2,
            prior_n: 10,
            draws_l: 1000,
            iterations_n: 10,
            trials_per_iter: k,
            alpha_target: alpha,
            prior_level: None,
            rate_level: Default::default(),
        };
        let reps = 200;
        let total: f64 = (0..reps)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + r);
                let run = crm_run(&cfg, &mut exponential_oracle(lambda, r), &mut rng).unwrap();
                (run.quantile(alpha) / truth - 1.0).abs()
            })
            .sum();
        errors.push(total / reps as f64);
    }
    assert!(errors[0] >= errors[1] * 0.95 && errors[1] >= errors[2] * 0.95, "{errors:?}");
}
