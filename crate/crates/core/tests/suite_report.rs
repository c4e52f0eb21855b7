use mixcut::family::FamilyParams;
use mixcut::suite::{evaluate_witness, run_suite, Inequality, SuiteConfig, SuiteReport};

fn small(seed: u64) -> SuiteConfig {
    SuiteConfig {
        master_seed: seed,
        chain_count: 24,
        ..SuiteConfig::default()
    }
}

#[test]
fn every_enabled_inequality_passes_on_a_small_batch() {
    let report = run_suite(&small(3)).unwrap();
    for r in &report.results {
        assert!(r.passed, "{:?}", r);
        assert!(r.instances > 0);
    }
    assert!(report.nonvacuous);
    assert!(report.errors.is_empty());
    assert!(report.passed);
    assert_eq!(report.schema_version, 1);
}

#[test]
fn witnesses_reproduce_their_margins() {
    let config = small(5);
    let report = run_suite(&config).unwrap();
    for r in &report.results {
        let w = r.witness.as_ref().unwrap();
        let again = evaluate_witness(&config, r.id, w).unwrap();
        assert!((again - w.margin).abs() <= 1e-12, "{:?}: {again} vs {}", r.id, w.margin);
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run_suite(&small(9)).unwrap().to_json();
    let b = run_suite(&small(9)).unwrap().to_json();
    assert_eq!(a, b);
    let c = run_suite(&small(10)).unwrap().to_json();
    assert_ne!(a, c);
    let back: SuiteReport = serde_json::from_str(&a).unwrap();
    assert_eq!(back.to_json(), a);
}

#[test]
fn tolerance_override_flips_verdict() {
    let mut config = SuiteConfig {
        master_seed: 1,
        chain_count: 10,
        inequalities: vec![Inequality::PrecutoffRatio],
        family: vec![],
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap();
    let r = report.result(Inequality::PrecutoffRatio).unwrap();
    assert!(r.passed);
    config.tolerances.insert(Inequality::PrecutoffRatio, f64::MIN_POSITIVE);
    let strict = run_suite(&config).unwrap();
    let s = strict.result(Inequality::PrecutoffRatio).unwrap();
    assert_eq!(s.worst_margin, r.worst_margin);
    assert_eq!(s.passed, r.worst_margin <= f64::MIN_POSITIVE);
}

#[test]
fn bad_instances_are_recorded_not_fatal() {
    let config = SuiteConfig {
        master_seed: 2,
        chain_count: 4,
        inequalities: vec![Inequality::TvPairwise],
        family: vec![FamilyParams { n: 1, epsilon: 0.5 }],
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap();
    let r = report.result(Inequality::TvPairwise).unwrap();
    assert_eq!(r.errors, 1);
    assert!(r.instances > 0);
    assert!(!r.passed);
    assert!(!report.passed);
    assert_eq!(report.errors.len(), 1);
}

#[test]
fn hellinger_window_in_suite() {
    let config = SuiteConfig {
        master_seed: 4,
        chain_count: 3,
        inequalities: vec![Inequality::HellingerWindow],
        family: vec![],
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap();
    let r = report.result(Inequality::HellingerWindow).unwrap();
    assert_eq!(r.instances, 3);
    assert_eq!(r.tolerance, 0.05);
}

#[test]
fn invalid_configs() {
    for bad in [
        SuiteConfig { chain_count: 0, ..SuiteConfig::default() },
        SuiteConfig { state_range: (1, 4), ..SuiteConfig::default() },
        SuiteConfig { inequalities: vec![], ..SuiteConfig::default() },
    ] {
        assert!(matches!(run_suite(&bad), Err(mixcut::Error::InvalidConfig(_))));
    }
    let mut neg = SuiteConfig::default();
    neg.tolerances.insert(Inequality::TvPairwise, 0.0);
    assert!(run_suite(&neg).is_err());
}
