use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::calibrator::{CalibrationReport, YearFit};
use crate::error::Result;
use crate::model::ModelConfig;

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest decimal form that reads back to the same `f64`; empty for missing values.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes the table; `comment` lines go first, each prefixed with `# `.
    pub fn write(&self, path: &Path, comment: &[String]) -> Result<()> {
        let mut buf = Vec::new();
        for c in comment {
            writeln!(buf, "# {c}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.columns).map_err(|e| crate::Error::Io(e.to_string()))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| crate::Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        fs::write(path, buf).map_err(|e| crate::Error::Io(format!("{}: {e}", path.display())))
    }
}

/// `F_I(0, T_{2y-2}, T_{2y})` against the forward-CPI ratio approximation, `y = 1..years`.
pub fn forward_inflation_table(cfg: &ModelConfig) -> Result<Table> {
    let mut t = Table::new(&[
        "year",
        "k",
        "start_yr",
        "end_yr",
        "forward_inflation",
        "approximation",
        "difference_bp",
    ]);
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    for y in 1..=tenor.years() {
        let k = 2 * y;
        let f = cfg.forward_inflation(k, 2, &s0)?;
        let a = cfg.forward_inflation_approx(k, 2, &s0)?;
        t.push(vec![
            y.to_string(),
            k.to_string(),
            num(tenor.date(k - 2)),
            num(tenor.date(k)),
            num(f),
            num(a),
            num((f - a) * 1e4),
        ]);
    }
    Ok(t)
}

fn caplet_table(report: &CalibrationReport) -> Table {
    let mut t = Table::new(&[
        "year",
        "k",
        "expiry_yr",
        "strike",
        "market_vol",
        "model_vol",
        "vol_error",
        "market_price",
        "model_price",
    ]);
    let tenor = report.config.tenor();
    let mut years: Vec<&YearFit> = report.nominal.iter().collect();
    years.sort_by_key(|y| y.year);
    for y in years {
        for i in &y.instruments {
            let err = match (i.market_vol, i.model_vol) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            };
            t.push(vec![
                y.year.to_string(),
                i.k.to_string(),
                num(tenor.date(i.k - 1)),
                num(i.strike),
                opt(i.market_vol),
                opt(i.model_vol),
                opt(err),
                num(i.market_price),
                num(i.model_price),
            ]);
        }
    }
    t
}

fn inflation_option_table(report: &CalibrationReport) -> Table {
    let mut t = Table::new(&[
        "year",
        "kind",
        "strike",
        "market_bp",
        "model_bp",
        "error_bp",
        "market_vol",
        "model_vol",
    ]);
    for y in &report.inflation {
        for i in &y.instruments {
            t.push(vec![
                y.year.to_string(),
                i.kind.name().to_string(),
                num(i.strike),
                num(i.market_price * 1e4),
                num(i.model_price * 1e4),
                num((i.model_price - i.market_price) * 1e4),
                opt(i.market_vol),
                opt(i.model_vol),
            ]);
        }
    }
    t
}

fn residual_table(report: &CalibrationReport) -> Table {
    let mut t = Table::new(&["table", "index", "maturity_yr", "market", "model", "error"]);
    for (name, rows) in [
        ("discount", &report.discount_residuals),
        ("ilb", &report.ilb_residuals),
        ("zciis", &report.zciis_residuals),
    ] {
        for r in rows {
            t.push(vec![
                name.into(),
                r.k.to_string(),
                num(r.maturity_yr),
                num(r.market),
                num(r.model),
                num(r.relative_error),
            ]);
        }
    }
    t
}

fn year_table(report: &CalibrationReport) -> Table {
    let mut t = Table::new(&[
        "stage",
        "year",
        "component",
        "kind",
        "status",
        "objective",
        "initial_objective",
        "evaluations",
        "parameters",
    ]);
    for y in report.nominal.iter().chain(&report.inflation) {
        t.push(vec![
            y.stage.clone(),
            y.year.to_string(),
            y.component_index.to_string(),
            y.component.kind_name().into(),
            format!("{:?}", y.status),
            num(y.objective),
            num(y.initial_objective),
            y.evaluations.to_string(),
            serde_json::to_string(&y.component).unwrap_or_default(),
        ]);
    }
    t
}

/// Writes the plot-ready tables of a calibration report into `dir`.
///
/// Inflation tables are omitted for nominal-only reports. Returns the written paths in a fixed order.
pub fn emit_tables(report: &CalibrationReport, dir: &Path, comment: &[String]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut tables = vec![
        ("caplet_vols.csv", caplet_table(report)),
        ("residuals.csv", residual_table(report)),
        ("year_fits.csv", year_table(report)),
    ];
    if !report.nominal_only {
        tables.push(("inflation_options.csv", inflation_option_table(report)));
        tables.push(("forward_inflation.csv", forward_inflation_table(&report.config)?));
    }
    let mut out = Vec::new();
    for (name, t) in tables {
        let p = dir.join(name);
        t.write(&p, comment)?;
        out.push(p);
    }
    Ok(out)
}
