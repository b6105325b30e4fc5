mod common;

use std::fs;
use std::path::{Path, PathBuf};

use affine_inflation::market_data::{forward_inflation_table, load_snapshot, write_snapshot, MarketSnapshot};
use affine_inflation::Error;
use common::{reference, rel};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.json")
}

fn copy_fixture(dir: &Path) -> PathBuf {
    let src = fixture();
    let src_dir = src.parent().unwrap();
    for f in ["manifest.json", "discounts.csv", "caplet_vols.csv", "zciis.csv", "infl_options.csv"] {
        fs::copy(src_dir.join(f), dir.join(f)).unwrap();
    }
    dir.join("manifest.json")
}

#[test]
fn bundled_fixture_loads() {
    let snap = load_snapshot(fixture()).unwrap();
    assert_eq!(snap.discounts.len(), 20);
    assert_eq!(snap.zciis.len(), 10);
    assert!(!snap.nominal_only());
    assert!(!snap.caplet_vols.is_empty() && !snap.infl_options.is_empty());
    let ratios = snap.curve_ratios();
    assert_eq!(*ratios.last().unwrap(), 1.0);
    assert!(ratios.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn fixture_matches_its_model() {
    let snap = load_snapshot(fixture()).unwrap();
    let text = fs::read_to_string(fixture().with_file_name("model.json")).unwrap();
    let cfg: affine_inflation::ModelConfig = serde_json::from_str(&text).unwrap();
    for k in 1..=cfg.n() {
        assert!(rel(cfg.discount(k).unwrap(), snap.discount(k)) < 1e-13);
    }
    for q in &snap.zciis {
        assert!((cfg.zciis_rate(q.years).unwrap() - q.rate).abs() < 1e-13);
    }
}

#[test]
fn write_then_load_is_exact() {
    let snap = load_snapshot(fixture()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_snapshot(&snap, dir.path(), Some("copy")).unwrap();
    let back = load_snapshot(&manifest).unwrap();
    assert_eq!(back, snap);
}

#[test]
fn missing_inflation_files_give_a_nominal_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = copy_fixture(dir.path());
    fs::remove_file(dir.path().join("zciis.csv")).unwrap();
    fs::remove_file(dir.path().join("infl_options.csv")).unwrap();
    let snap = load_snapshot(&manifest).unwrap();
    assert!(snap.nominal_only());
    assert!(snap.ilb_curve().is_err());
}

fn expect_validation(err: Error, file: &str, row: usize) {
    match err {
        Error::Validation { file: f, row: r, .. } => {
            assert_eq!(f, file);
            assert_eq!(r, row);
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn invalid_rows_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = copy_fixture(dir.path());
    let disc = dir.path().join("discounts.csv");
    let text = fs::read_to_string(&disc).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    lines[4] = "2.0,0.999".into();
    fs::write(&disc, lines.join("\n")).unwrap();
    expect_validation(load_snapshot(&manifest).unwrap_err(), "discounts.csv", 4);

    lines[4] = "2.25,0.96".into();
    fs::write(&disc, lines.join("\n")).unwrap();
    expect_validation(load_snapshot(&manifest).unwrap_err(), "discounts.csv", 4);
}

#[test]
fn unsorted_caplets_are_rejected() {
    let mut snap: MarketSnapshot = load_snapshot(fixture()).unwrap();
    snap.caplet_vols.swap(1, 2);
    expect_validation(snap.validate().unwrap_err(), "caplet_vols.csv", 3);
}

#[test]
fn malformed_csv_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = copy_fixture(dir.path());
    fs::write(dir.path().join("zciis.csv"), "years,rate\n1,abc\n").unwrap();
    assert!(matches!(load_snapshot(&manifest).unwrap_err(), Error::Schema { .. }));
    fs::write(&manifest, "{ not json").unwrap();
    assert!(matches!(load_snapshot(&manifest).unwrap_err(), Error::Schema { .. }));
    assert!(matches!(load_snapshot(dir.path().join("absent.json")).unwrap_err(), Error::Io(_)));
}

#[test]
fn ilb_curve_hits_annual_zciis_pillars() {
    let snap = load_snapshot(fixture()).unwrap();
    let cpi = snap.forward_cpi().unwrap();
    for q in &snap.zciis {
        let want = (1.0 + q.rate).powi(q.years as i32);
        assert!(rel(cpi[2 * q.years - 1], want) < 1e-14);
    }
}

#[test]
fn forward_inflation_table_has_one_row_per_year() {
    let cfg = reference(4);
    let t = forward_inflation_table(&cfg).unwrap();
    assert_eq!(t.rows.len(), 4);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fi.csv");
    t.write(&p, &["synthetic".into()]).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&p).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), t.columns.len());
    for (row, y) in rdr.records().zip(1..) {
        let row = row.unwrap();
        assert_eq!(row[0].parse::<usize>().unwrap(), y);
        let f: f64 = row[4].parse().unwrap();
        assert_eq!(f, cfg.forward_inflation(2 * y, 2, &cfg.initial_state()).unwrap());
    }
}
