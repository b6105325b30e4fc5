//! Two-stage calibration: nominal curve and caplets backwards in time, then the ILB curve and
//! inflation options forwards in time.

mod curve;
mod roots;
mod settings;
mod simplex;
mod year;

use serde::{Deserialize, Serialize};

pub use curve::{
    check_lemma, fit_ubar, fit_ubar_index, fit_utilde, fit_vbar, fit_vbar_index, fit_vtilde, LemmaCheck,
    RootRecord,
};
pub use roots::{bisect_secant, convex_argmin, cumulant_roots, search_interval, RootPolicy, RootSolve};
pub use settings::{CalibrationSettings, CirJumpBox, ObjectiveKind, OuJumpBox, Range};
pub use simplex::{minimize, SimplexResult, SimplexSettings};
pub use year::{FitStatus, InstrumentFit, YearFit, PENALTY};

use year::{calibrate_year, skipped_year, Stage, Working, YearQuotes};

use crate::affine::{AffineComponent, ProductProcess};
use crate::error::{Error, Result};
use crate::market_data::{InflOptionKind, MarketSnapshot};
use crate::model::{Generators, ModelConfig, TenorStructure};
use crate::pricer::{OptionKind, OptionQuote};

/// Relative error of one exactly fitted curve pillar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveResidual {
    pub k: usize,
    pub maturity_yr: f64,
    pub market: f64,
    pub model: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub config: ModelConfig,
    pub settings: CalibrationSettings,
    pub nominal_only: bool,
    pub discount_residuals: Vec<CurveResidual>,
    pub ilb_residuals: Vec<CurveResidual>,
    pub zciis_residuals: Vec<CurveResidual>,
    pub nominal: Vec<YearFit>,
    pub inflation: Vec<YearFit>,
    pub roots: Vec<RootRecord>,
    pub lemma_checks: Vec<LemmaCheck>,
}

impl CalibrationReport {
    pub fn max_curve_error(&self) -> f64 {
        self.discount_residuals
            .iter()
            .chain(&self.ilb_residuals)
            .map(|r| r.relative_error.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_zciis_error(&self) -> f64 {
        self.zciis_residuals
            .iter()
            .map(|r| r.relative_error.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_objective(&self) -> f64 {
        self.nominal
            .iter()
            .chain(&self.inflation)
            .map(|y| y.objective)
            .fold(0.0, f64::max)
    }
}

fn initial_process(years: usize, settings: &CalibrationSettings) -> Result<ProductProcess> {
    let mut comps = vec![AffineComponent::Cir(settings.common)];
    comps.extend((0..years).map(|_| AffineComponent::CirJump(settings.nominal_initial)));
    comps.extend((0..years).map(|_| AffineComponent::OuJump(settings.inflation_initial)));
    ProductProcess::new(comps)
}

fn tag(records: Vec<RootRecord>, stage: &str) -> Vec<RootRecord> {
    records
        .into_iter()
        .map(|mut r| {
            r.stage = stage.into();
            r
        })
        .collect()
}

/// Fits every generator to the curves for fixed drivers: `u_tilde`, `u_bar`, and when an ILB
/// curve is given `v_tilde`, `v_bar`.
pub fn fit_term_structure(
    tenor: TenorStructure,
    process: ProductProcess,
    numeraire: f64,
    ratios: &[f64],
    ilb: Option<&[f64]>,
    settings: &CalibrationSettings,
) -> Result<(ModelConfig, Vec<RootRecord>)> {
    let (w, roots) = fit_working(tenor, process, numeraire, ratios, ilb, settings)?;
    Ok((w.config()?, roots))
}

fn fit_working(
    tenor: TenorStructure,
    process: ProductProcess,
    numeraire: f64,
    ratios: &[f64],
    ilb: Option<&[f64]>,
    settings: &CalibrationSettings,
) -> Result<(Working, Vec<RootRecord>)> {
    let horizon = tenor.horizon();
    let n = tenor.n;
    let mut g = Generators::zeros(n);
    g.u_tilde = if settings.half_variance {
        fit_utilde(process.component(0), horizon, ratios, settings.root_tolerance)
            .map_err(|e| e.in_stage("u_tilde"))?
    } else {
        vec![0.0; n]
    };
    g.v_tilde = g.u_tilde.clone();
    let mut roots = tag(
        fit_ubar(&process, &tenor, &mut g, ratios, settings.root_tolerance).map_err(|e| e.in_stage("u_bar"))?,
        "u_bar",
    );
    if let Some(ilb) = ilb {
        g.v_tilde = fit_vtilde(&g.u_tilde, settings.tilt_c);
        roots.extend(tag(
            fit_vbar(&process, &tenor, &mut g, ilb, settings.root_tolerance, settings.two_root_policy)
                .map_err(|e| e.in_stage("v_bar"))?,
            "v_bar",
        ));
    }
    let w = Working {
        tenor,
        process,
        generators: g,
        numeraire,
    };
    w.config().map_err(|e| e.in_stage("term structure"))?;
    Ok((w, roots))
}

/// Caplet quotes on `F^{2y}` (fixing at `T_{2y-1}`) for nominal year `y`.
pub fn caplet_quotes(cfg_tenor: &TenorStructure, snapshot: &MarketSnapshot, y: usize, cfg: &ModelConfig) -> Result<Vec<(OptionQuote, f64)>> {
    let k = 2 * y;
    let expiry = cfg_tenor.date(k - 1);
    let s0 = cfg.initial_state();
    let fwd = cfg.forward_rate(k, &s0)?;
    let d = cfg.discount(k)?;
    let delta = cfg_tenor.delta;
    Ok(snapshot
        .caplet_vols
        .iter()
        .filter(|q| (q.expiry_yr - expiry).abs() < 1e-9)
        .map(|q| {
            let price = delta * crate::pricer::black(fwd, q.strike, expiry, q.vol, d, true);
            (
                OptionQuote {
                    kind: OptionKind::IrCaplet,
                    k,
                    j: 0,
                    strike: q.strike,
                    price,
                },
                q.vol,
            )
        })
        .collect())
}

/// Annual inflation option quotes maturing at year `y`.
pub fn inflation_quotes(snapshot: &MarketSnapshot, y: usize) -> Vec<OptionQuote> {
    snapshot
        .infl_options
        .iter()
        .filter(|q| (q.maturity_yr - y as f64).abs() < 1e-9)
        .map(|q| OptionQuote {
            kind: match q.kind {
                InflOptionKind::Caplet => OptionKind::InflCaplet,
                InflOptionKind::Floorlet => OptionKind::InflFloorlet,
            },
            k: 2 * y,
            j: 2,
            strike: q.strike,
            price: q.price_bp * 1e-4,
        })
        .collect()
}

/// Runs the full calibration of `snapshot`.
pub fn calibrate(snapshot: &MarketSnapshot, settings: &CalibrationSettings) -> Result<CalibrationReport> {
    settings.validate()?;
    snapshot.validate()?;
    let tenor = snapshot.tenor();
    let years = tenor.years();
    let ratios = snapshot.curve_ratios();
    let numeraire = snapshot.discount(tenor.n);
    let process = initial_process(years, settings)?;
    let (mut w, mut roots) = fit_working(tenor, process, numeraire, &ratios, None, settings)?;

    let mut nominal = Vec::new();
    let mut start = AffineComponent::CirJump(settings.nominal_initial);
    for y in (1..=years).rev() {
        let cfg = w.config()?;
        let quotes = caplet_quotes(&tenor, snapshot, y, &cfg).map_err(|e| e.in_stage(format!("nominal year {y}")))?;
        if quotes.is_empty() {
            nominal.push(skipped_year(
                format!("nominal year {y}"),
                y,
                y,
                *w.process.component(y),
                settings.nominal_objective,
            ));
            continue;
        }
        let yq = YearQuotes {
            quotes: quotes.iter().map(|q| q.0).collect(),
            market_vols: quotes.iter().map(|q| Some(q.1)).collect(),
        };
        let first = if settings.warm_start { start } else { AffineComponent::CirJump(settings.nominal_initial) };
        let fit = calibrate_year(&mut w, y, Stage::Nominal { ratios: &ratios }, &yq, first, settings)?;
        start = fit.component;
        nominal.push(fit);
    }
    // lower indices were fitted against provisional drivers of later years
    roots.extend(tag(
        fit_ubar(&w.process, &w.tenor, &mut w.generators, &ratios, settings.root_tolerance)
            .map_err(|e| e.in_stage("u_bar"))?,
        "u_bar final",
    ));

    let nominal_only = snapshot.zciis.is_empty();
    let mut inflation = Vec::new();
    let ilb = if nominal_only { None } else { Some(snapshot.ilb_curve()?) };
    if let Some(ilb) = &ilb {
        w.generators.v_tilde = fit_vtilde(&w.generators.u_tilde, settings.tilt_c);
        roots.extend(tag(
            fit_vbar(&w.process, &w.tenor, &mut w.generators, ilb, settings.root_tolerance, settings.two_root_policy)
                .map_err(|e| e.in_stage("v_bar"))?,
            "v_bar",
        ));
        let mut start = AffineComponent::OuJump(settings.inflation_initial);
        for y in 1..=years {
            let quotes = inflation_quotes(snapshot, y);
            if quotes.is_empty() {
                inflation.push(skipped_year(
                    format!("inflation year {y}"),
                    y,
                    years + y,
                    *w.process.component(years + y),
                    settings.inflation_objective,
                ));
                continue;
            }
            let yq = YearQuotes {
                market_vols: vec![None; quotes.len()],
                quotes,
            };
            let first = if settings.warm_start { start } else { AffineComponent::OuJump(settings.inflation_initial) };
            let fit = calibrate_year(&mut w, y, Stage::Inflation { ilb }, &yq, first, settings)?;
            start = fit.component;
            inflation.push(fit);
        }
    }

    let cfg = w.config()?;
    cfg.check_monotone().map_err(|e| e.in_stage("final"))?;
    let mut discount_residuals = Vec::new();
    for k in 1..=tenor.n {
        let market = snapshot.discount(k);
        let model = cfg.discount(k)?;
        discount_residuals.push(CurveResidual {
            k,
            maturity_yr: tenor.date(k),
            market,
            model,
            relative_error: (model - market) / market,
        });
    }
    let mut ilb_residuals = Vec::new();
    let mut zciis_residuals = Vec::new();
    if let Some(ilb) = &ilb {
        for k in 1..=tenor.n {
            let market = ilb[k - 1] * numeraire;
            let model = cfg.real_bond(k)?;
            ilb_residuals.push(CurveResidual {
                k,
                maturity_yr: tenor.date(k),
                market,
                model,
                relative_error: (model - market) / market,
            });
        }
        for q in &snapshot.zciis {
            let model = cfg.zciis_rate(q.years)?;
            zciis_residuals.push(CurveResidual {
                k: 2 * q.years,
                maturity_yr: q.years as f64,
                market: q.rate,
                model,
                relative_error: model - q.rate,
            });
        }
    }
    let mut lemma_checks = Vec::new();
    for k in [1, tenor.n / 2, tenor.n] {
        for i in [0, k.div_ceil(2), years + k.div_ceil(2)] {
            lemma_checks.push(check_lemma(&cfg, k, i, 41)?);
        }
    }
    if let Some(bad) = lemma_checks.iter().find(|c| !c.convex || (c.nonnegative && !c.monotone)) {
        return Err(Error::Stage {
            stage: "lemma check".into(),
            source: Box::new(Error::InvalidConfig(format!("{bad:?}"))),
        });
    }
    Ok(CalibrationReport {
        config: cfg,
        settings: settings.clone(),
        nominal_only,
        discount_residuals,
        ilb_residuals,
        zciis_residuals,
        nominal,
        inflation,
        roots,
        lemma_checks,
    })
}
