mod common;

use affine_inflation::calibrator::{calibrate, CalibrationSettings, FitStatus};
use affine_inflation::market_data::emit_tables;
use affine_inflation::synthetic::{curve_snapshot, reference_config, snapshot_from_model};
use affine_inflation::AffineComponent;

#[test]
fn two_year_round_trip() {
    let settings = CalibrationSettings::default();
    let truth = reference_config(2, &settings).unwrap();
    let snap = snapshot_from_model(&truth, &curve_snapshot(2), &settings).unwrap();
    let report = calibrate(&snap, &settings).unwrap();
    assert!(!report.nominal_only);
    assert!(report.max_curve_error() < 1e-10, "{}", report.max_curve_error());
    assert!(report.max_zciis_error() < 1e-10, "{}", report.max_zciis_error());
    assert!(report.max_objective() < 1e-8, "{}", report.max_objective());
    assert_eq!(report.nominal.len(), 2);
    assert_eq!(report.inflation.len(), 2);
    for y in report.nominal.iter().chain(&report.inflation) {
        assert!(y.history_monotone);
        assert!(y.objective <= y.initial_objective);
        assert_ne!(y.status, FitStatus::OptimizerFailure);
    }
    assert_eq!(report.config.process().component(0), truth.process().component(0));
    for (k, (a, b)) in report.config.generators().u_tilde.iter().zip(&truth.generators().u_tilde).enumerate() {
        assert!((a - b).abs() < 1e-10, "u_tilde[{k}]");
    }
    // the nominal year fitted last is pinned by its caplets
    if let (AffineComponent::CirJump(a), AffineComponent::CirJump(b)) =
        (report.config.process().component(1), truth.process().component(1))
    {
        assert!((a.lambda - b.lambda).abs() < 0.1 * b.lambda);
    }

    let dir = tempfile::tempdir().unwrap();
    let written = emit_tables(&report, dir.path(), &["round trip".into()]).unwrap();
    assert_eq!(written.len(), 5);
    for p in &written {
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# round trip\n"));
        assert!(text.lines().count() > 2);
    }
}

#[test]
fn nominal_only_snapshot_skips_inflation() {
    let settings = CalibrationSettings {
        starts: 1,
        polish_rounds: 0,
        ..CalibrationSettings::default()
    };
    let truth = reference_config(1, &settings).unwrap();
    let mut snap = snapshot_from_model(&truth, &curve_snapshot(1), &settings).unwrap();
    snap.zciis.clear();
    snap.infl_options.clear();
    let report = calibrate(&snap, &settings).unwrap();
    assert!(report.nominal_only);
    assert!(report.inflation.is_empty());
    assert!(report.ilb_residuals.is_empty());
    assert!(report.max_curve_error() < 1e-10);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(emit_tables(&report, dir.path(), &[]).unwrap().len(), 3);
}

#[test]
fn invalid_settings_are_rejected() {
    let settings = CalibrationSettings::default();
    let truth = reference_config(1, &settings).unwrap();
    let snap = snapshot_from_model(&truth, &curve_snapshot(1), &settings).unwrap();
    let mut bad = settings.clone();
    bad.nominal_box.lambda = [2.0, 1.0];
    assert!(calibrate(&snap, &bad).is_err());
}
