use std::fs;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splitq_campaign::{
    read_log, AbatementTable, BatchInput, CampaignError, CampaignService, CampaignSession, CreateSession,
    SessionEvent, SessionStatus,
};
use splitq_core::distributions::{ModelKind, TailParams};
use splitq_core::estimators::{BinaryDataset, EstimateError, Estimator, EstimatorRegistry, Fit, FitContext};
use splitq_core::simulation::BernoulliOracle;
use splitq_core::splitting::{run_splitting, LadderConfig, TrialOracle, TrialRequest};

fn at() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2024-03-04T10:00:00Z").unwrap().with_timezone(&Utc)
}

fn config(seed: u64) -> LadderConfig {
    let truth = TailParams::gpd(0.8, 1.5).unwrap();
    let p = 10f64.powf(-0.6);
    let mut c = LadderConfig::new(1e-3, p, 50, truth.quantile(1.0 - p).unwrap());
    c.seed = seed;
    c
}

fn request(seed: u64) -> CreateSession {
    CreateSession {
        config: config(seed),
        model: ModelKind::Gpd,
        estimator: "enhanced".into(),
        abatement: None,
    }
}

fn oracle(seed: u64) -> BernoulliOracle {
    BernoulliOracle::new(TailParams::gpd(0.8, 1.5).unwrap(), ChaCha8Rng::seed_from_u64(seed))
}

fn drive(svc: &CampaignService, id: &str, oracle: &mut dyn TrialOracle) {
    while let Some(rec) = svc.get(id).unwrap().recommendation {
        let req = TrialRequest {
            stage: rec.stage,
            level: rec.level,
            prev_level: rec.prev_level,
            count: rec.trials,
        };
        svc.record(id, BatchInput::outcomes(oracle.trials(&req))).unwrap();
    }
}

#[test]
fn service_matches_library_bit_for_bit() {
    let reg = EstimatorRegistry::builtin();
    let est = reg.get("enhanced").unwrap();
    for seed in [1u64, 2, 3] {
        let lib = run_splitting(&config(seed), ModelKind::Gpd, &mut oracle(seed), est.as_ref()).unwrap();
        let svc = CampaignService::in_memory(EstimatorRegistry::builtin());
        let doc = svc.create_with(format!("s{seed}"), at(), request(seed)).unwrap();
        assert_eq!(doc.stage_count, 5);
        drive(&svc, &doc.id, &mut oracle(seed));
        let done = svc.get(&doc.id).unwrap();
        assert_eq!(done.status, SessionStatus::Complete);
        assert_eq!(done.ladder.to_canonical_json(), lib.to_canonical_json());
        let est = done.estimate.unwrap();
        assert_eq!(est.level, *lib.levels.last().unwrap());
        assert_eq!(svc.report(&doc.id).unwrap().session.estimate.unwrap().level, est.level);
    }
}

#[test]
fn file_store_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let before = {
        let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
        svc.create_with("a".into(), at(), request(5)).unwrap();
        svc.create_with("b".into(), at(), request(6)).unwrap();
        for f in [11, 14, 12] {
            svc.record("a", BatchInput::failures(f)).unwrap();
        }
        svc.record("b", BatchInput::failures(12)).unwrap();
        (svc.canonical_json("a").unwrap(), svc.canonical_json("b").unwrap())
    };
    let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
    assert_eq!(svc.canonical_json("a").unwrap(), before.0);
    assert_eq!(svc.canonical_json("b").unwrap(), before.1);
    assert_eq!(svc.list().len(), 2);
    assert_eq!(svc.get("b").unwrap().ladder.phat, vec![12.0 / 50.0]);

    let log = read_log(dir.path().join("sessions/a.jsonl")).unwrap();
    let replayed = CampaignSession::replay(&log, &EstimatorRegistry::builtin()).unwrap();
    assert_eq!(replayed.canonical_json(), before.0);
}

#[test]
fn recovery_drops_torn_writes_and_reindexes() {
    let dir = tempfile::tempdir().unwrap();
    let durable = {
        let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
        svc.create_with("a".into(), at(), request(9)).unwrap();
        svc.record("a", BatchInput::failures(13)).unwrap();
        svc.create_with("orphan".into(), at(), request(10)).unwrap();
        svc.canonical_json("a").unwrap()
    };
    // Crash mid-append of the second batch, and lose the index entry of a session.
    let path = dir.path().join("sessions/a.jsonl");
    let mut bytes = fs::read(&path).unwrap();
    bytes.extend_from_slice(br#"{"event":"batch_recorded","stage":2,"outc"#);
    fs::write(&path, bytes).unwrap();
    let index = fs::read_to_string(dir.path().join("index.jsonl")).unwrap();
    let kept: String = index.lines().filter(|l| !l.contains("orphan")).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("index.jsonl"), kept).unwrap();

    let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
    assert_eq!(svc.canonical_json("a").unwrap(), durable);
    assert_eq!(svc.get("orphan").unwrap().batches_recorded, 0);
    // The repaired log accepts further writes.
    svc.record("a", BatchInput::failures(10)).unwrap();
    drop(svc);
    let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
    assert_eq!(svc.get("a").unwrap().batches_recorded, 2);
    assert_eq!(svc.list().len(), 2);
}

#[test]
fn state_machine_errors_leave_no_trace() {
    let svc = CampaignService::in_memory(EstimatorRegistry::builtin());
    let mut cfg = config(1);
    cfg.m = Some(2);
    let req = CreateSession {
        config: cfg,
        ..request(1)
    };
    svc.create_with("x".into(), at(), req).unwrap();
    assert!(svc.record("x", BatchInput::outcomes(vec![0; 49])).is_err());
    assert!(svc.record("x", BatchInput::outcomes(vec![2; 50])).is_err());
    assert!(svc.record("x", BatchInput::failures(51)).is_err());
    assert_eq!(svc.events("x").unwrap().len(), 1);
    svc.record("x", BatchInput::failures(10)).unwrap();
    svc.record("x", BatchInput::failures(11)).unwrap();
    let before = svc.canonical_json("x").unwrap();
    assert!(matches!(
        svc.record("x", BatchInput::failures(3)),
        Err(CampaignError::Splitting(splitq_core::splitting::SplittingError::Complete))
    ));
    assert_eq!(svc.canonical_json("x").unwrap(), before);
    assert!(matches!(svc.get("nope"), Err(CampaignError::NotFound(_))));
}

#[test]
fn degenerate_batch_is_flagged_not_fatal() {
    let svc = CampaignService::in_memory(EstimatorRegistry::builtin());
    svc.create_with("d".into(), at(), request(1)).unwrap();
    svc.record("d", BatchInput::failures(10)).unwrap();
    let doc = svc.record("d", BatchInput::failures(0)).unwrap();
    assert_eq!(doc.status, SessionStatus::AwaitingBatch);
    assert_eq!(doc.ladder.fits[1].estimator, "carried");
    assert_eq!(doc.ladder.fits[1].params, doc.ladder.fits[0].params);
    let report = svc.report("d").unwrap();
    assert_eq!(report.stages[1].flags.len(), 1);
}

struct Failing;

impl Estimator for Failing {
    fn name(&self) -> &str {
        "failing"
    }

    fn fit(&self, _: &BinaryDataset, _: &FitContext) -> Result<Fit, EstimateError> {
        Err(EstimateError::Failed("injected fault".into()))
    }
}

fn failing_registry() -> EstimatorRegistry {
    let mut reg = EstimatorRegistry::builtin();
    reg.register(Arc::new(Failing));
    reg
}

#[test]
fn estimator_failure_aborts_and_is_reported_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let svc = CampaignService::open(dir.path(), failing_registry()).unwrap();
    let req = CreateSession {
        estimator: "failing".into(),
        ..request(1)
    };
    svc.create_with("f".into(), at(), req).unwrap();
    let err = svc.record("f", BatchInput::failures(10)).unwrap_err();
    let CampaignError::EstimatorFailed { stage, message } = &err else {
        panic!("{err}")
    };
    assert_eq!(*stage, 1);
    let report = svc.report("f").unwrap();
    assert_eq!(report.session.status, SessionStatus::Aborted);
    assert!(report.session.recommendation.is_none());
    let SessionEvent::BatchFailed { error, .. } = report.events.last().unwrap() else {
        panic!("last event must be the failure")
    };
    assert_eq!(error, message);
    assert!(report.session.failure.as_deref().unwrap().contains(message.as_str()));
    assert!(matches!(
        svc.record("f", BatchInput::failures(10)),
        Err(CampaignError::Splitting(splitq_core::splitting::SplittingError::Aborted(_)))
    ));
    let before = svc.canonical_json("f").unwrap();
    drop(svc);
    let svc = CampaignService::open(dir.path(), failing_registry()).unwrap();
    assert_eq!(svc.canonical_json("f").unwrap(), before);
}

#[test]
fn abatement_drives_flaw_recommendation() {
    let svc = CampaignService::in_memory(EstimatorRegistry::builtin());
    let mut cfg = config(1);
    cfg.s1 = Some(1.0 / 350.0);
    let req = CreateSession {
        config: cfg,
        abatement: Some(AbatementTable::new(vec![(0.0, 500.0), (1.8, 200.0)], Some("bench 2023".into())).unwrap()),
        ..request(1)
    };
    svc.create_with("ab".into(), at(), req).unwrap();
    let rec = svc.recommendation("ab").unwrap().recommendation.unwrap();
    assert!((rec.stress - 350.0).abs() < 1e-9);
    assert!((rec.flaw_diameter.unwrap() - 0.9).abs() < 1e-9);
    assert_eq!(svc.get("ab").unwrap().abatement.unwrap().provenance(), Some("bench 2023"));
    let plain = svc.create_with("pl".into(), at(), request(1)).unwrap();
    let rec = plain.recommendation.unwrap();
    assert!(rec.flaw_diameter.is_none() && rec.flaw_error.is_none());
}

#[test]
fn concurrent_sessions_are_independent() {
    let svc = Arc::new(CampaignService::in_memory(EstimatorRegistry::builtin()));
    for i in 0..4 {
        svc.create_with(format!("c{i}"), at(), request(i)).unwrap();
    }
    let handles: Vec<_> = (0..4u64)
        .map(|i| {
            let svc = svc.clone();
            std::thread::spawn(move || {
                let id = format!("c{i}");
                let mut o = oracle(i);
                drive(&svc, &id, &mut o);
                svc.get(&id).unwrap().ladder.to_canonical_json()
            })
        })
        .collect();
    let reg = EstimatorRegistry::builtin();
    let est = reg.get("enhanced").unwrap();
    for (i, h) in handles.into_iter().enumerate() {
        let lib = run_splitting(&config(i as u64), ModelKind::Gpd, &mut oracle(i as u64), est.as_ref()).unwrap();
        assert_eq!(h.join().unwrap(), lib.to_canonical_json());
    }
}

#[test]
fn logged_floats_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(4);
    cfg.s1 = Some(0.1 + 0.2);
    cfg.alpha = 3.2813751715821127e-4;
    let req = CreateSession { config: cfg, ..request(4) };
    let live = {
        let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
        svc.create_with("r".into(), at(), req).unwrap();
        svc.record("r", BatchInput::failures(17)).unwrap();
        svc.record("r", BatchInput::failures(9)).unwrap();
        svc.get("r").unwrap()
    };
    let svc = CampaignService::open(dir.path(), EstimatorRegistry::builtin()).unwrap();
    let back = svc.get("r").unwrap();
    assert_eq!(back.config.s1, live.config.s1);
    assert_eq!(back.config.alpha, live.config.alpha);
    assert_eq!(back.ladder, live.ladder);
}
