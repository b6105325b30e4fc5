use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{fit_ubar_index, fit_vbar_index};
use super::settings::{
    cirjump_from, cirjump_params, oujump_from, oujump_params, CalibrationSettings, ObjectiveKind, Range,
};
use super::simplex::{minimize, SimplexResult, SimplexSettings};
use crate::affine::{AffineComponent, ProductProcess};
use crate::error::{Error, Result};
use crate::model::{Generators, ModelConfig, TenorStructure};
use crate::pricer::{implied_vol, price_options, OptionKind, OptionQuote};

/// Objective value assigned to candidates that break the model.
pub const PENALTY: f64 = 1e6;

/// Model and market values of one calibration instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentFit {
    pub kind: OptionKind,
    pub k: usize,
    pub j: usize,
    pub strike: f64,
    pub market_price: f64,
    pub model_price: f64,
    pub market_vol: Option<f64>,
    pub model_vol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitStatus {
    Converged,
    MaxEvaluations,
    /// No candidate improved on the starting point, or only penalized candidates were found.
    OptimizerFailure,
    Skipped,
}

/// Outcome of one per-year stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearFit {
    pub stage: String,
    pub year: usize,
    pub component_index: usize,
    pub component: AffineComponent,
    pub objective_kind: ObjectiveKind,
    pub objective: f64,
    pub initial_objective: f64,
    pub evaluations: usize,
    /// Best objective after each optimizer iteration, across all starts and the polish.
    pub history: Vec<f64>,
    pub history_monotone: bool,
    pub status: FitStatus,
    /// Fewer quotes than free parameters.
    pub rank_deficient: bool,
    pub instruments: Vec<InstrumentFit>,
}

/// Mutable calibration state: the model is rebuilt from it after every accepted step.
#[derive(Debug, Clone)]
pub(crate) struct Working {
    pub tenor: TenorStructure,
    pub process: ProductProcess,
    pub generators: Generators,
    pub numeraire: f64,
}

impl Working {
    pub fn config(&self) -> Result<ModelConfig> {
        ModelConfig::new(self.tenor, self.process.clone(), self.numeraire, self.generators.clone())
    }
}

/// Market side of one year: option quotes and, for caplets, the market vols.
pub(crate) struct YearQuotes {
    pub quotes: Vec<OptionQuote>,
    pub market_vols: Vec<Option<f64>>,
}

struct Space {
    ranges: Vec<Range>,
    free: Vec<usize>,
}

impl Space {
    fn new(ranges: &[Range]) -> Self {
        Space {
            ranges: ranges.to_vec(),
            free: (0..ranges.len()).filter(|&i| ranges[i][1] > ranges[i][0]).collect(),
        }
    }

    fn to_params(&self, z: &[f64], base: &[f64]) -> Vec<f64> {
        let mut p = base.to_vec();
        for (i, r) in self.ranges.iter().enumerate() {
            if r[0] == r[1] {
                p[i] = r[0];
            }
        }
        for (zi, &i) in z.iter().zip(&self.free) {
            let r = self.ranges[i];
            p[i] = r[0] + zi.clamp(0.0, 1.0) * (r[1] - r[0]);
        }
        p
    }

    fn to_unit(&self, p: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| {
                let r = self.ranges[i];
                ((p[i] - r[0]) / (r[1] - r[0])).clamp(0.0, 1.0)
            })
            .collect()
    }
}

fn van_der_corput(mut i: usize, base: usize) -> f64 {
    let (mut q, mut denom) = (0.0, 1.0);
    while i > 0 {
        denom *= base as f64;
        q += (i % base) as f64 / denom;
        i /= base;
    }
    q
}

const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Deterministic start points: the given start, then Halton points pulled halfway towards it.
fn starts(first: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut out = vec![first.to_vec()];
    for s in 1..count {
        out.push(
            first
                .iter()
                .enumerate()
                .map(|(d, x)| 0.5 * (x + van_der_corput(s, PRIMES[d % PRIMES.len()])))
                .collect(),
        );
    }
    out
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len().max(1) as f64
}

/// Model prices (unit notional) for the quotes, grouped by kind so each group shares one Fourier batch.
pub(crate) fn model_prices(cfg: &ModelConfig, quotes: &[OptionQuote], settings: &CalibrationSettings) -> Result<Vec<f64>> {
    let mut out = vec![0.0; quotes.len()];
    let mut groups: Vec<(OptionKind, usize, usize, Vec<usize>)> = Vec::new();
    for (i, q) in quotes.iter().enumerate() {
        match groups.iter_mut().find(|g| g.0 == q.kind && g.1 == q.k && g.2 == q.j) {
            Some(g) => g.3.push(i),
            None => groups.push((q.kind, q.k, q.j, vec![i])),
        }
    }
    for (kind, k, j, idx) in groups {
        let strikes: Vec<f64> = idx.iter().map(|&i| quotes[i].strike).collect();
        let priced = price_options(cfg, kind, k, j, &strikes, &settings.contour)?;
        for (i, p) in idx.iter().zip(priced) {
            out[*i] = p.price;
        }
    }
    Ok(out)
}

fn objective_value(
    cfg: &ModelConfig,
    yq: &YearQuotes,
    kind: ObjectiveKind,
    settings: &CalibrationSettings,
) -> Result<(f64, Vec<f64>)> {
    let prices = model_prices(cfg, &yq.quotes, settings)?;
    let value = match kind {
        ObjectiveKind::PriceMse => {
            let model: Vec<f64> = prices.iter().map(|p| p * 1e4).collect();
            let market: Vec<f64> = yq.quotes.iter().map(|q| q.price * 1e4).collect();
            mse(&model, &market)
        }
        ObjectiveKind::ImpliedVolMse => {
            let mut acc = 0.0;
            for ((q, p), mv) in yq.quotes.iter().zip(&prices).zip(&yq.market_vols) {
                let market = match mv {
                    Some(v) => *v,
                    None => implied_vol(cfg, q)?,
                };
                let model = implied_vol(cfg, &OptionQuote { price: *p, ..*q }).unwrap_or(0.0);
                acc += (model - market).powi(2);
            }
            acc / yq.quotes.len().max(1) as f64
        }
    };
    Ok((value, prices))
}

/// Nominal year `y`: driver `X^y` with `u_bar_{2y}`, `u_bar_{2y-1}` refitted.
pub(crate) fn nominal_candidate(w: &Working, y: usize, c: AffineComponent, ratios: &[f64], tol: f64) -> Result<Working> {
    let mut cand = w.clone();
    cand.process.set_component(y, c)?;
    for k in [2 * y, 2 * y - 1] {
        fit_ubar_index(&cand.process, &cand.tenor, &mut cand.generators, k, ratios[k - 1], tol)?;
    }
    Ok(cand)
}

/// Inflation year `y`: driver `X^{M+y}` with `v_bar_{2y}`, `v_bar_{2y-1}` refitted.
pub(crate) fn inflation_candidate(
    w: &Working,
    y: usize,
    c: AffineComponent,
    ilb: &[f64],
    settings: &CalibrationSettings,
) -> Result<Working> {
    let mut cand = w.clone();
    let slot = cand.tenor.years() + y;
    cand.process.set_component(slot, c)?;
    for k in [2 * y - 1, 2 * y] {
        fit_vbar_index(
            &cand.process,
            &cand.tenor,
            &mut cand.generators,
            k,
            ilb[k - 1],
            settings.root_tolerance,
            settings.two_root_policy,
        )?;
    }
    Ok(cand)
}

pub(crate) enum Stage<'a> {
    Nominal { ratios: &'a [f64] },
    Inflation { ilb: &'a [f64] },
}

/// Optimizes one year's driver; on return `w` holds the best candidate.
pub(crate) fn calibrate_year(
    w: &mut Working,
    y: usize,
    stage: Stage<'_>,
    yq: &YearQuotes,
    start: AffineComponent,
    settings: &CalibrationSettings,
) -> Result<YearFit> {
    let (ranges, base, x0, objective_kind, slot, name): (Vec<Range>, Vec<f64>, f64, ObjectiveKind, usize, String) =
        match (&stage, start) {
            (Stage::Nominal { .. }, AffineComponent::CirJump(c)) => (
                settings.nominal_box.ranges().to_vec(),
                cirjump_params(&c).to_vec(),
                c.x0,
                settings.nominal_objective,
                y,
                format!("nominal year {y}"),
            ),
            (Stage::Inflation { .. }, AffineComponent::OuJump(c)) => (
                settings.inflation_box.ranges().to_vec(),
                oujump_params(&c).to_vec(),
                c.x0,
                settings.inflation_objective,
                w.tenor.years() + y,
                format!("inflation year {y}"),
            ),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "year {y}: start component of the wrong kind"
                )))
            }
        };
    let space = Space::new(&ranges);
    let build = |p: &[f64]| -> AffineComponent {
        match stage {
            Stage::Nominal { .. } => AffineComponent::CirJump(cirjump_from(p, x0)),
            Stage::Inflation { .. } => AffineComponent::OuJump(oujump_from(p, x0)),
        }
    };
    let candidate = |z: &[f64]| -> Result<(Working, ModelConfig)> {
        let c = build(&space.to_params(z, &base));
        c.validate()?;
        let cand = match stage {
            Stage::Nominal { ratios } => nominal_candidate(w, y, c, ratios, settings.root_tolerance)?,
            Stage::Inflation { ilb } => inflation_candidate(w, y, c, ilb, settings)?,
        };
        let cfg = cand.config()?;
        if matches!(stage, Stage::Nominal { .. }) {
            cfg.check_monotone()?;
        }
        Ok((cand, cfg))
    };
    let objective = |z: &[f64]| -> f64 {
        match candidate(z).and_then(|(_, cfg)| objective_value(&cfg, yq, objective_kind, settings)) {
            Ok((v, _)) if v.is_finite() => v,
            _ => PENALTY,
        }
    };

    let z0 = space.to_unit(&base);
    let initial_objective = objective(&z0);
    let cold = match stage {
        Stage::Nominal { .. } => cirjump_params(&settings.nominal_initial).to_vec(),
        Stage::Inflation { .. } => oujump_params(&settings.inflation_initial).to_vec(),
    };
    let mut points = starts(&z0, settings.starts);
    let z_cold = space.to_unit(&cold);
    if settings.starts > 1 && z_cold != z0 {
        points.push(z_cold);
    }
    let runs: Vec<SimplexResult> = points
        .par_iter()
        .map(|s| minimize(objective, s, &settings.simplex))
        .collect();
    let best_run = runs
        .iter()
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .ok_or_else(|| Error::Optimizer("no optimizer runs".into()))?;
    let polish_settings = SimplexSettings {
        initial_step: 0.02,
        ..settings.simplex
    };
    let (mut z_best, mut f_best) = (best_run.x.clone(), best_run.f);
    let mut polishes = Vec::new();
    for _ in 0..settings.polish_rounds {
        if f_best <= settings.simplex.target {
            break;
        }
        let p = minimize(objective, &z_best, &polish_settings);
        let improved = p.f < 0.99 * f_best;
        if p.f <= f_best {
            z_best = p.x.clone();
            f_best = p.f;
        }
        polishes.push(p);
        if !improved {
            break;
        }
    }

    let mut history = Vec::new();
    let mut best_so_far = f64::INFINITY;
    for h in runs.iter().chain(&polishes).flat_map(|r| r.history.iter()) {
        best_so_far = best_so_far.min(*h);
        history.push(best_so_far);
    }
    let history_monotone = runs
        .iter()
        .chain(&polishes)
        .all(|r| r.history.windows(2).all(|p| p[1] <= p[0]));
    if !history_monotone {
        log::warn!("{name}: optimizer history not monotone");
    }
    let evaluations = runs.iter().chain(&polishes).map(|r| r.evaluations).sum::<usize>();
    let converged = runs.iter().chain(&polishes).any(|r| r.converged);

    let (z_final, f_final) = if f_best <= initial_objective {
        (z_best, f_best)
    } else {
        (z0.clone(), initial_objective)
    };
    let status = if f_final >= PENALTY || (f_final >= initial_objective && initial_objective > settings.simplex.target) {
        FitStatus::OptimizerFailure
    } else if converged {
        FitStatus::Converged
    } else {
        FitStatus::MaxEvaluations
    };
    log::info!("{name}: objective {initial_objective:.3e} -> {f_final:.3e} in {evaluations} evaluations ({status:?})");

    let component = build(&space.to_params(&z_final, &base));
    let (cand, cfg) = candidate(&z_final).map_err(|e| e.in_stage(name.clone()))?;
    *w = cand;
    let instruments = instrument_fits(&cfg, yq, settings)?;
    Ok(YearFit {
        stage: name,
        year: y,
        component_index: slot,
        component,
        objective_kind,
        objective: f_final,
        initial_objective,
        evaluations,
        history,
        history_monotone,
        status,
        rank_deficient: yq.quotes.len() < space.free.len(),
        instruments,
    })
}

pub(crate) fn instrument_fits(cfg: &ModelConfig, yq: &YearQuotes, settings: &CalibrationSettings) -> Result<Vec<InstrumentFit>> {
    let prices = model_prices(cfg, &yq.quotes, settings)?;
    Ok(yq
        .quotes
        .iter()
        .zip(&prices)
        .zip(&yq.market_vols)
        .map(|((q, p), mv)| InstrumentFit {
            kind: q.kind,
            k: q.k,
            j: q.j,
            strike: q.strike,
            market_price: q.price,
            model_price: *p,
            market_vol: mv.or_else(|| implied_vol(cfg, q).ok()),
            model_vol: implied_vol(cfg, &OptionQuote { price: *p, ..*q }).ok(),
        })
        .collect())
}

/// A year with no quotes keeps its starting driver.
pub(crate) fn skipped_year(name: String, y: usize, slot: usize, component: AffineComponent, kind: ObjectiveKind) -> YearFit {
    YearFit {
        stage: name,
        year: y,
        component_index: slot,
        component,
        objective_kind: kind,
        objective: 0.0,
        initial_objective: 0.0,
        evaluations: 0,
        history: Vec::new(),
        history_monotone: true,
        status: FitStatus::Skipped,
        rank_deficient: true,
        instruments: Vec::new(),
    }
}
