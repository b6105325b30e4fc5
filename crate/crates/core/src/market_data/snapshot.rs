use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TenorStructure;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountPillar {
    pub maturity_yr: f64,
    pub df: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapletVol {
    pub expiry_yr: f64,
    pub strike: f64,
    pub vol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZciisQuote {
    pub years: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InflOptionKind {
    Caplet,
    Floorlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflOptionQuote {
    pub maturity_yr: f64,
    pub strike: f64,
    pub kind: InflOptionKind,
    pub price_bp: f64,
}

/// Manifest pointing at the CSV files of a snapshot, relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub as_of: NaiveDate,
    pub discounts: PathBuf,
    pub caplet_vols: PathBuf,
    #[serde(default)]
    pub zciis: Option<PathBuf>,
    #[serde(default)]
    pub infl_options: Option<PathBuf>,
    #[serde(default)]
    pub description: Option<String>,
}

/// Validated market data for one as-of date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSnapshot {
    pub as_of: NaiveDate,
    pub discounts: Vec<DiscountPillar>,
    pub caplet_vols: Vec<CapletVol>,
    pub zciis: Vec<ZciisQuote>,
    pub infl_options: Vec<InflOptionQuote>,
}

fn on_grid(t: f64, delta: f64) -> Option<usize> {
    let k = (t / delta).round();
    if k >= 0.0 && (t - k * delta).abs() < TIME_EPS {
        Some(k as usize)
    } else {
        None
    }
}

impl MarketSnapshot {
    /// Semiannual tenor implied by the discount pillars.
    pub fn tenor(&self) -> TenorStructure {
        TenorStructure {
            delta: 0.5,
            n: self.discounts.len(),
        }
    }

    /// `P(0, T_k)`, with `P(0, T_0) = 1`.
    pub fn discount(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.discounts[k - 1].df
        }
    }

    /// `P(0, T_k) / P(0, T)` for `k = 1..N`.
    pub fn curve_ratios(&self) -> Vec<f64> {
        let last = self.discounts.last().map_or(1.0, |p| p.df);
        self.discounts.iter().map(|p| p.df / last).collect()
    }

    /// True when no inflation data is present.
    pub fn nominal_only(&self) -> bool {
        self.zciis.is_empty() && self.infl_options.is_empty()
    }

    /// Enforces every invariant; errors name the file and row.
    pub fn validate(&self) -> Result<()> {
        let bad = |file: &str, row: usize, message: String| Error::Validation {
            file: file.into(),
            row,
            message,
        };
        let delta = 0.5;
        if self.discounts.is_empty() {
            return Err(bad("discounts.csv", 0, "no discount pillars".into()));
        }
        if !self.discounts.len().is_multiple_of(2) {
            return Err(bad(
                "discounts.csv",
                self.discounts.len(),
                "pillars must cover whole years".into(),
            ));
        }
        let mut prev = 1.0;
        for (i, p) in self.discounts.iter().enumerate() {
            let row = i + 1;
            if on_grid(p.maturity_yr, delta) != Some(i + 1) {
                return Err(bad(
                    "discounts.csv",
                    row,
                    format!("maturity {} is not tenor date T_{}", p.maturity_yr, i + 1),
                ));
            }
            if !(p.df > 0.0 && p.df <= 1.0) {
                return Err(bad("discounts.csv", row, format!("discount factor {} outside (0, 1]", p.df)));
            }
            if p.df.is_nan() || p.df >= prev {
                return Err(bad(
                    "discounts.csv",
                    row,
                    format!(
                        "discount factors must strictly decrease (negative forward at pillar {})",
                        p.maturity_yr
                    ),
                ));
            }
            prev = p.df;
        }
        let horizon = self.discounts.len() as f64 * delta;

        for (i, q) in self.caplet_vols.iter().enumerate() {
            let row = i + 1;
            if on_grid(q.expiry_yr, delta).is_none() || q.expiry_yr > horizon - delta + TIME_EPS {
                return Err(bad(
                    "caplet_vols.csv",
                    row,
                    format!("expiry {} is not a fixing date before the horizon", q.expiry_yr),
                ));
            }
            if !(q.vol > 0.0 && q.vol.is_finite()) {
                return Err(bad("caplet_vols.csv", row, format!("vol {} must be positive", q.vol)));
            }
            if q.strike.is_nan() || q.strike <= -1.0 / delta {
                return Err(bad("caplet_vols.csv", row, format!("strike {} too low", q.strike)));
            }
            if i > 0 {
                let p = self.caplet_vols[i - 1];
                if p.expiry_yr > q.expiry_yr
                    || (p.expiry_yr == q.expiry_yr && p.strike >= q.strike)
                {
                    return Err(bad(
                        "caplet_vols.csv",
                        row,
                        "rows must be sorted by expiry then strictly by strike".into(),
                    ));
                }
            }
        }

        for (i, z) in self.zciis.iter().enumerate() {
            let row = i + 1;
            if z.years != i + 1 {
                return Err(bad("zciis.csv", row, format!("expected {} years, found {}", i + 1, z.years)));
            }
            if z.years as f64 > horizon + TIME_EPS {
                return Err(bad("zciis.csv", row, format!("{} years beyond the horizon", z.years)));
            }
            if !(z.rate > -1.0 && z.rate.is_finite()) {
                return Err(bad("zciis.csv", row, format!("rate {} invalid", z.rate)));
            }
        }

        for (i, q) in self.infl_options.iter().enumerate() {
            let row = i + 1;
            match on_grid(q.maturity_yr, 1.0) {
                Some(y) if y >= 1 && q.maturity_yr <= horizon + TIME_EPS => {}
                _ => {
                    return Err(bad(
                        "infl_options.csv",
                        row,
                        format!("maturity {} must be a whole year within the horizon", q.maturity_yr),
                    ))
                }
            }
            if !(q.price_bp >= 0.0 && q.price_bp.is_finite()) {
                return Err(bad("infl_options.csv", row, format!("price {} must be nonnegative", q.price_bp)));
            }
            if q.strike.is_nan() || q.strike <= -1.0 {
                return Err(bad("infl_options.csv", row, format!("strike {} too low", q.strike)));
            }
            if i > 0 {
                let p = self.infl_options[i - 1];
                if p.maturity_yr > q.maturity_yr
                    || (p.maturity_yr == q.maturity_yr && p.strike >= q.strike)
                {
                    return Err(bad(
                        "infl_options.csv",
                        row,
                        "rows must be sorted by maturity then strictly by strike".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `P_ILB(0, T_k) / P(0, T)` for `k = 1..N` from the ZCIIS pillars.
    ///
    /// Annual pillars are exact; odd pillars interpolate `log I(0, T)` linearly in time.
    pub fn ilb_curve(&self) -> Result<Vec<f64>> {
        let n = self.discounts.len();
        if self.zciis.len() * 2 < n {
            return Err(Error::Validation {
                file: "zciis.csv".into(),
                row: self.zciis.len(),
                message: format!("ZCIIS pillars cover {} years, curve needs {}", self.zciis.len(), n / 2),
            });
        }
        let log_cpi = |k: usize| -> f64 {
            if k == 0 {
                0.0
            } else {
                let q = self.zciis[k / 2 - 1];
                q.years as f64 * q.rate.ln_1p()
            }
        };
        let ratios = self.curve_ratios();
        Ok((1..=n)
            .map(|k| {
                let l = if k % 2 == 0 {
                    log_cpi(k)
                } else {
                    0.5 * (log_cpi(k - 1) + log_cpi(k + 1))
                };
                l.exp() * ratios[k - 1]
            })
            .collect())
    }

    /// Forward CPI `I(0, T_k)` implied by [`ilb_curve`](Self::ilb_curve).
    pub fn forward_cpi(&self) -> Result<Vec<f64>> {
        let ratios = self.curve_ratios();
        Ok(self.ilb_curve()?.iter().zip(&ratios).map(|(a, b)| a / b).collect())
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(format!("{file}: {e}")),
            _ => Error::Schema {
                file: file.clone(),
                message: e.to_string(),
            },
        })?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| Error::Schema {
            file: file.clone(),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn read_optional<T: DeserializeOwned>(dir: &Path, p: &Option<PathBuf>) -> Result<Vec<T>> {
    match p {
        Some(p) if dir.join(p).exists() => read_csv(&dir.join(p)),
        _ => Ok(Vec::new()),
    }
}

/// Loads and validates a snapshot from its manifest.
pub fn load_snapshot(manifest_path: impl AsRef<Path>) -> Result<MarketSnapshot> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| Error::Io(format!("{}: {e}", manifest_path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
        file: manifest_path.display().to_string(),
        message: e.to_string(),
    })?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let snapshot = MarketSnapshot {
        as_of: manifest.as_of,
        discounts: read_csv(&dir.join(&manifest.discounts))?,
        caplet_vols: read_csv(&dir.join(&manifest.caplet_vols))?,
        zciis: read_optional(dir, &manifest.zciis)?,
        infl_options: read_optional(dir, &manifest.infl_options)?,
    };
    snapshot.validate()?;
    Ok(snapshot)
}

/// Writes the snapshot as `manifest.json` plus four CSV files in `dir`.
///
/// Floats are written in shortest round-trip form, so loading reproduces every value exactly.
pub fn write_snapshot(snapshot: &MarketSnapshot, dir: impl AsRef<Path>, description: Option<&str>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        as_of: snapshot.as_of,
        discounts: "discounts.csv".into(),
        caplet_vols: "caplet_vols.csv".into(),
        zciis: Some("zciis.csv".into()),
        infl_options: Some("infl_options.csv".into()),
        description: description.map(str::to_owned),
    };
    write_csv(&dir.join("discounts.csv"), &snapshot.discounts, &["maturity_yr", "df"])?;
    write_csv(&dir.join("caplet_vols.csv"), &snapshot.caplet_vols, &["expiry_yr", "strike", "vol"])?;
    write_csv(&dir.join("zciis.csv"), &snapshot.zciis, &["years", "rate"])?;
    write_csv(
        &dir.join("infl_options.csv"),
        &snapshot.infl_options,
        &["maturity_yr", "strike", "kind", "price_bp"],
    )?;
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, json + "\n")?;
    Ok(path)
}
