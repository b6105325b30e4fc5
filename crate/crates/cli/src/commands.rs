use std::fs;
use std::path::Path;

use affine_inflation::calibrator::{calibrate as run_calibration, inflation_quotes, CalibrationReport};
use affine_inflation::market_data::{emit_tables, load_snapshot, num, opt, write_snapshot, MarketSnapshot, Table};
use affine_inflation::mc::SimulationPlan;
use affine_inflation::pricer::{implied_vol, price_options, ContourSpec, OptionKind, OptionQuote, PricedOption};
use affine_inflation::synthetic::{caplet_quote_grid, reference_snapshot};
use affine_inflation::validate::{validate_model, CheckStatus, ValidationOptions};
use affine_inflation::{Error, ModelConfig, Result};
use serde_json::json;

use crate::inputs::{
    digests_json, header, load_model, load_settings, read_instruments, snapshot_digests, write_json, InputDigest,
};
use crate::{Common, Filters};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_STAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Schema { .. } => EXIT_IO,
        Error::Validation { .. } => EXIT_VALIDATION,
        _ => EXIT_STAGE,
    }
}

fn prepare(common: &Common) -> Result<Vec<InputDigest>> {
    fs::create_dir_all(&common.out).map_err(|e| Error::Io(format!("{}: {e}", common.out.display())))?;
    match &common.settings {
        Some(p) => Ok(vec![InputDigest::of("settings", p)?]),
        None => Ok(Vec::new()),
    }
}

fn contour(common: &Common) -> Result<ContourSpec> {
    Ok(load_settings(common.settings.as_deref())?.contour)
}

fn expiry(cfg: &ModelConfig, q: &OptionQuote) -> f64 {
    match q.kind {
        OptionKind::IrCaplet | OptionKind::IrFloorlet => cfg.tenor().date(q.k - 1),
        _ => cfg.tenor().date(q.k),
    }
}

fn price_one(cfg: &ModelConfig, q: &OptionQuote, spec: &ContourSpec) -> Result<(PricedOption, Option<f64>)> {
    let p = price_options(cfg, q.kind, q.k, q.j, &[q.strike], spec)?[0];
    let vol = implied_vol(cfg, &OptionQuote { price: p.price, ..*q }).ok();
    Ok((p, vol))
}

fn status_line(name: &str, rows: usize, failed: usize) {
    println!("{name}: {rows} rows, {failed} failed");
}

pub fn calibrate(snapshot_path: &Path, common: &Common) -> Result<u8> {
    let mut digests = snapshot_digests(snapshot_path)?;
    digests.extend(prepare(common)?);
    let settings = load_settings(common.settings.as_deref())?;
    let snapshot = load_snapshot(snapshot_path)?;
    let report_path = common.out.join("report.json");
    match run_calibration(&snapshot, &settings) {
        Ok(report) => {
            write_calibration(&report, &digests, common)?;
            println!(
                "calibrated {} years{}: max curve error {:.3e}, max zciis error {:.3e}, max objective {:.3e}",
                report.config.years(),
                if report.nominal_only { " (nominal only)" } else { "" },
                report.max_curve_error(),
                report.max_zciis_error(),
                report.max_objective()
            );
            Ok(EXIT_OK)
        }
        Err(e) => {
            let stage = match &e {
                Error::Stage { stage, .. } => Some(stage.clone()),
                _ => None,
            };
            write_json(
                &report_path,
                &json!({
                    "inputs": digests_json(&digests),
                    "status": "failed",
                    "stage": stage,
                    "error": e.to_string(),
                    "settings": settings,
                }),
            )?;
            eprintln!("calibration failed; partial report in {}", report_path.display());
            Err(e)
        }
    }
}

fn write_calibration(report: &CalibrationReport, digests: &[InputDigest], common: &Common) -> Result<()> {
    write_json(&common.out.join("model.json"), &to_json(&report.config))?;
    write_json(
        &common.out.join("report.json"),
        &json!({
            "inputs": digests_json(digests),
            "status": "ok",
            "summary": {
                "nominalOnly": report.nominal_only,
                "maxCurveError": report.max_curve_error(),
                "maxZciisError": report.max_zciis_error(),
                "maxObjective": report.max_objective(),
            },
            "report": to_json(report),
        }),
    )?;
    emit_tables(report, &common.out, &header("aimm calibrate", digests))?;
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

pub fn price(model_path: &Path, instruments: &Path, common: &Common, filters: &Filters) -> Result<u8> {
    let mut digests = vec![InputDigest::of("model", model_path)?, InputDigest::of("instruments", instruments)?];
    digests.extend(prepare(common)?);
    let cfg = load_model(model_path)?;
    let spec = contour(common)?;
    let rows = read_instruments(instruments, &cfg)?;
    let mut t = Table::new(&[
        "kind", "k", "j", "strike", "expiry_yr", "price", "implied_vol", "damping", "upper", "panels", "error",
    ]);
    let mut failed = 0;
    for row in &rows {
        let [kind, k, j, strike] = row.fields.clone();
        let result = row.quote.clone().and_then(|q| {
            if !filters.keep(expiry(&cfg, &q), q.strike) {
                return Ok(None);
            }
            price_one(&cfg, &q, &spec).map(|r| Some((q, r))).map_err(|e| e.to_string())
        });
        match result {
            Ok(None) => {}
            Ok(Some((q, (p, vol)))) => t.push(vec![
                q.kind.name().into(),
                q.k.to_string(),
                q.j.to_string(),
                num(q.strike),
                num(expiry(&cfg, &q)),
                num(p.price),
                opt(vol),
                num(p.damping),
                num(p.upper),
                p.panels.to_string(),
                String::new(),
            ]),
            Err(msg) => {
                failed += 1;
                t.push(vec![kind, k, j, strike, String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), msg]);
            }
        }
    }
    t.write(&common.out.join("prices.csv"), &header("aimm price", &digests))?;
    status_line("prices.csv", t.rows.len(), failed);
    Ok(if failed > 0 { EXIT_STAGE } else { EXIT_OK })
}

fn caplet_surface(cfg: &ModelConfig, snap: &MarketSnapshot, spec: &ContourSpec, filters: &Filters) -> Result<(Table, usize)> {
    let mut t = Table::new(&[
        "year", "k", "expiry_yr", "strike", "market_vol", "model_vol", "vol_error", "market_price", "model_price", "error",
    ]);
    let mut failed = 0;
    for y in 1..=cfg.years() {
        for (q, market_vol) in caplet_quote_grid(cfg, snap, y)? {
            let expiry_yr = expiry(cfg, &q);
            if !filters.keep(expiry_yr, q.strike) {
                continue;
            }
            let mut row = vec![y.to_string(), q.k.to_string(), num(expiry_yr), num(q.strike), num(market_vol)];
            match price_one(cfg, &q, spec) {
                Ok((p, vol)) => row.extend([
                    opt(vol),
                    opt(vol.map(|v| v - market_vol)),
                    num(q.price),
                    num(p.price),
                    String::new(),
                ]),
                Err(e) => {
                    failed += 1;
                    row.extend([String::new(), String::new(), num(q.price), String::new(), e.to_string()]);
                }
            }
            t.push(row);
        }
    }
    Ok((t, failed))
}

fn inflation_surface(cfg: &ModelConfig, snap: &MarketSnapshot, spec: &ContourSpec, filters: &Filters) -> (Table, usize) {
    let mut t = Table::new(&[
        "year", "kind", "k", "j", "maturity_yr", "strike", "market_vol", "model_vol", "vol_error", "market_bp", "model_bp",
        "error_bp", "error",
    ]);
    let mut failed = 0;
    for y in 1..=cfg.years() {
        for q in inflation_quotes(snap, y) {
            let maturity = expiry(cfg, &q);
            if !filters.keep(maturity, q.strike) {
                continue;
            }
            let market_vol = implied_vol(cfg, &q).ok();
            let mut row = vec![
                y.to_string(),
                q.kind.name().into(),
                q.k.to_string(),
                q.j.to_string(),
                num(maturity),
                num(q.strike),
                opt(market_vol),
            ];
            match price_one(cfg, &q, spec) {
                Ok((p, vol)) => {
                    let err = match (vol, market_vol) {
                        (Some(a), Some(b)) => Some(a - b),
                        _ => None,
                    };
                    row.extend([
                        opt(vol),
                        opt(err),
                        num(q.price * 1e4),
                        num(p.price * 1e4),
                        num((p.price - q.price) * 1e4),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    failed += 1;
                    row.extend([String::new(), String::new(), num(q.price * 1e4), String::new(), String::new(), e.to_string()]);
                }
            }
            t.push(row);
        }
    }
    (t, failed)
}

pub fn surface(model_path: &Path, snapshot_path: &Path, common: &Common, filters: &Filters) -> Result<u8> {
    let mut digests = vec![InputDigest::of("model", model_path)?];
    digests.extend(snapshot_digests(snapshot_path)?);
    digests.extend(prepare(common)?);
    let cfg = load_model(model_path)?;
    let snap = load_snapshot(snapshot_path)?;
    if snap.tenor() != *cfg.tenor() {
        return Err(Error::InvalidConfig(format!(
            "snapshot tenor {:?} does not match model tenor {:?}",
            snap.tenor(),
            cfg.tenor()
        )));
    }
    let spec = contour(common)?;
    let head = header("aimm surface", &digests);
    let (caplets, mut failed) = caplet_surface(&cfg, &snap, &spec, filters)?;
    caplets.write(&common.out.join("surface_caplets.csv"), &head)?;
    status_line("surface_caplets.csv", caplets.rows.len(), failed);
    if !snap.infl_options.is_empty() {
        let (infl, f) = inflation_surface(&cfg, &snap, &spec, filters);
        infl.write(&common.out.join("surface_inflation.csv"), &head)?;
        status_line("surface_inflation.csv", infl.rows.len(), f);
        failed += f;
    }
    Ok(if failed > 0 { EXIT_STAGE } else { EXIT_OK })
}

pub fn validate(model_path: &Path, seed: u64, paths: usize, common: &Common) -> Result<u8> {
    let mut digests = vec![InputDigest::of("model", model_path)?];
    digests.extend(prepare(common)?);
    let cfg = load_model(model_path)?;
    let opts = ValidationOptions {
        plan: SimulationPlan::new(paths, seed),
        contour: contour(common)?,
        ..ValidationOptions::default()
    };
    opts.plan.validate()?;
    let report = validate_model(&cfg, &opts);
    let mut head = header("aimm validate", &digests);
    head.push(format!("seed {seed} paths {paths}"));
    report.table().write(&common.out.join("validation.csv"), &head)?;
    write_json(
        &common.out.join("validation.json"),
        &json!({
            "inputs": digests_json(&digests),
            "seed": seed,
            "paths": paths,
            "allPass": report.all_pass(),
            "checks": report.checks,
        }),
    )?;
    for c in &report.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
        };
        println!("{status:<12} {:<32} {}", c.name, c.detail);
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn synth(common: &Common) -> Result<u8> {
    prepare(common)?;
    let settings = load_settings(common.settings.as_deref())?;
    let (cfg, snap) = reference_snapshot(&settings)?;
    let manifest = write_snapshot(
        &snap,
        &common.out,
        Some("Synthetic snapshot generated from the reference model in model.json; not market data."),
    )?;
    write_json(&common.out.join("model.json"), &to_json(&cfg))?;
    println!("wrote {} and {}", manifest.display(), common.out.join("model.json").display());
    Ok(EXIT_OK)
}
