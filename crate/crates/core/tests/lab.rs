use crlab::basis::BasisFamily;
use crlab::coupling::build_tensor;
use crlab::dynamics::{IntegratorConfig, Projector};
use crlab::lab::{invariance_test, recurrence_experiment, ObservableSet, RecurrenceConfig, Verdict};
use crlab::measures::MeasureSpec;

#[test]
fn rescaled_tensor_is_caught_by_cross_check_only() {
    let tensor = build_tensor(BasisFamily::Holomorphic, 8).unwrap().scaled(1.1);
    let spec = MeasureSpec::white_noise(8, 41);
    let r = invariance_test(
        &spec,
        &tensor,
        &Projector::sharp(8),
        1.0,
        600,
        &ObservableSet::default(),
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(!r.cross_check.pass);
    assert!((r.cross_check.tensor_consistency - 0.1).abs() < 1e-9, "{:?}", r.cross_check);
    assert!(r.cross_check.flow_hamiltonian_drift < 1e-8);
}

#[test]
fn honest_tensor_passes_cross_check() {
    let tensor = build_tensor(BasisFamily::Holomorphic, 8).unwrap();
    let spec = MeasureSpec::gibbs(BasisFamily::Holomorphic, 8, 1.0, 42);
    let r = invariance_test(
        &spec,
        &tensor,
        &Projector::smooth(8),
        1.0,
        600,
        &ObservableSet::default(),
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.cross_check.pass, "{:?}", r.cross_check);
    assert_eq!(r.rows.len(), 600);
}

#[test]
fn small_recurrence_run() {
    let config = RecurrenceConfig {
        level: 1,
        t_max: 200.0,
        dt: 0.25,
        window: 50.0,
        n_samples: 6,
        seed: 3,
        ..RecurrenceConfig::default()
    };
    let r = recurrence_experiment(&config).unwrap();
    assert_eq!(r.samples.len(), 6);
    let recurred = r.samples.iter().filter(|s| s.recurred()).count();
    assert!((r.fraction_recurred - recurred as f64 / 6.0).abs() < 1e-15);
    assert_eq!(r.meets_target, r.fraction_recurred >= config.target_fraction);
    for s in &r.samples {
        assert!(s.running_min.windows(2).all(|w| w[1] <= w[0]));
        if let (Some(dep), Some(rec)) = (s.departed_at, s.recurred_at) {
            assert!(rec > dep);
        }
    }
    assert_eq!(recurrence_experiment(&config).unwrap(), r);
}
