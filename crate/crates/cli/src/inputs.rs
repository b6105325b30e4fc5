use std::fs;
use std::path::Path;

use affine_inflation::calibrator::CalibrationSettings;
use affine_inflation::market_data::Manifest;
use affine_inflation::pricer::{OptionKind, OptionQuote};
use affine_inflation::{Error, ModelConfig, Result};
use sha2::{Digest, Sha256};

/// SHA-256 digest of one input file.
#[derive(Debug, Clone)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(InputDigest {
            role: role.into(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }

    pub fn line(&self) -> String {
        format!("input {} {} sha256={}", self.role, self.path, self.sha256)
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({ "role": self.role, "path": self.path, "sha256": self.sha256 })
    }
}

pub fn header(tool: &str, digests: &[InputDigest]) -> Vec<String> {
    let mut lines = vec![format!("{tool} {}", env!("CARGO_PKG_VERSION"))];
    lines.extend(digests.iter().map(InputDigest::line));
    lines
}

pub fn digests_json(digests: &[InputDigest]) -> serde_json::Value {
    serde_json::Value::Array(digests.iter().map(InputDigest::json).collect())
}

/// Digests of a snapshot manifest and every data file it references.
pub fn snapshot_digests(manifest: &Path) -> Result<Vec<InputDigest>> {
    let mut out = vec![InputDigest::of("snapshot", manifest)?];
    let text = fs::read_to_string(manifest).map_err(|e| Error::Io(format!("{}: {e}", manifest.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
        file: manifest.display().to_string(),
        message: e.to_string(),
    })?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let files = [
        ("discounts", Some(m.discounts)),
        ("caplet_vols", Some(m.caplet_vols)),
        ("zciis", m.zciis),
        ("infl_options", m.infl_options),
    ];
    for (role, p) in files {
        if let Some(p) = p {
            let p = dir.join(p);
            if p.exists() {
                out.push(InputDigest::of(role, &p)?);
            }
        }
    }
    Ok(out)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_model(path: &Path) -> Result<ModelConfig> {
    read_json(path)
}

pub fn load_settings(path: Option<&Path>) -> Result<CalibrationSettings> {
    let s = match path {
        Some(p) => read_json(p)?,
        None => CalibrationSettings::default(),
    };
    s.validate()?;
    Ok(s)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// One line of an instrument list: the raw fields plus the parsed quote, or why it did not parse.
#[derive(Debug, Clone)]
pub struct InstrumentRow {
    pub fields: [String; 4],
    pub quote: std::result::Result<OptionQuote, String>,
}

fn parse_row(fields: &[String; 4], cfg: &ModelConfig) -> std::result::Result<OptionQuote, String> {
    let kind = OptionKind::parse(&fields[0]).map_err(|e| e.to_string())?;
    let k: usize = fields[1].trim().parse().map_err(|_| format!("bad k {:?}", fields[1]))?;
    let j: usize = if fields[2].trim().is_empty() {
        0
    } else {
        fields[2].trim().parse().map_err(|_| format!("bad j {:?}", fields[2]))?
    };
    let strike: f64 = fields[3].trim().parse().map_err(|_| format!("bad strike {:?}", fields[3]))?;
    let n = cfg.n();
    if k == 0 || k > n {
        return Err(format!("k = {k} outside 1..={n}"));
    }
    if matches!(kind, OptionKind::InflCaplet | OptionKind::InflFloorlet) && (j == 0 || j > k) {
        return Err(format!("lag j = {j} outside 1..={k}"));
    }
    if !strike.is_finite() {
        return Err("strike is not finite".into());
    }
    Ok(OptionQuote {
        kind,
        k,
        j,
        strike,
        price: 0.0,
    })
}

/// Reads `kind,k,j,strike` rows; `#` lines are comments. Malformed rows are kept with an error.
pub fn read_instruments(path: &Path, cfg: &ModelConfig) -> Result<Vec<InstrumentRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema {
            file: path.display().to_string(),
            message: e.to_string(),
        })?
        .clone();
    let want = ["kind", "k", "j", "strike"];
    if !headers.is_empty() && headers.iter().map(str::to_ascii_lowercase).ne(want.iter().map(|s| s.to_string())) {
        return Err(Error::Schema {
            file: path.display().to_string(),
            message: format!("expected header kind,k,j,strike, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Schema {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
        let fields: [String; 4] = std::array::from_fn(|i| rec.get(i).unwrap_or("").to_string());
        let quote = if rec.len() != 4 {
            Err(format!("expected 4 fields, found {}", rec.len()))
        } else {
            parse_row(&fields, cfg)
        };
        rows.push(InstrumentRow { fields, quote });
    }
    Ok(rows)
}
