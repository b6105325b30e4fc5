//! The reference model behind the bundled synthetic snapshot.
//!
//! Curve, swap and option shapes mimic a 2011 EUR market: an upward sloping curve around
//! 2.5%, ZCIIS rates near 2%, caplet strikes 1%..6% and inflation option strikes -2%..6%.

use chrono::NaiveDate;

use crate::affine::{AffineComponent, CirJump, OuJump, ProductProcess};
use crate::calibrator::{caplet_quotes, fit_term_structure, CalibrationSettings};
use crate::error::Result;
use crate::market_data::{CapletVol, DiscountPillar, InflOptionKind, InflOptionQuote, MarketSnapshot, ZciisQuote};
use crate::model::{ModelConfig, TenorStructure};
use crate::pricer::{black_vega, implied_vol, ir_caplet, price_options, OptionKind, OptionQuote};

pub const YEARS: usize = 10;

pub const CAPLET_STRIKES: [f64; 6] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06];

/// Caplets whose vega (per unit notional and unit vol) falls below this are not quoted.
pub const MIN_CAPLET_VEGA: f64 = 1e-5;

pub const INFLATION_STRIKES: [f64; 9] = [-0.02, -0.01, 0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06];

/// Continuously compounded zero rate.
pub fn zero_rate(t: f64) -> f64 {
    let x = t / 3.0;
    0.025 - 0.012 * (-(-x).exp_m1()) / x
}

pub fn zciis_rate(years: usize) -> f64 {
    0.017 + 0.005 * (-(-(years as f64) / 4.0).exp_m1())
}

pub fn nominal_driver(year: usize) -> CirJump {
    let l = year as f64;
    CirJump {
        lambda: 0.5 + 0.02 * l,
        theta: 1.0,
        eta: 0.35 + 0.01 * l,
        x0: 1.0,
        alpha: 8.0,
        beta: 0.3,
    }
}

pub fn inflation_driver(year: usize) -> OuJump {
    let l = year as f64;
    OuJump {
        lambda: 0.08 + 0.01 * l,
        theta: 1.0,
        sigma: 0.25 / l.sqrt(),
        x0: 1.0,
        alpha_plus: 25.0,
        beta_plus: 0.4,
        alpha_minus: 20.0,
        beta_minus: 0.6,
    }
}

pub fn reference_process(years: usize, settings: &CalibrationSettings) -> Result<ProductProcess> {
    let mut comps = vec![AffineComponent::Cir(settings.common)];
    comps.extend((1..=years).map(|y| AffineComponent::CirJump(nominal_driver(y))));
    comps.extend((1..=years).map(|y| AffineComponent::OuJump(inflation_driver(y))));
    ProductProcess::new(comps)
}

/// Curve and ZCIIS pillars without option quotes.
pub fn curve_snapshot(years: usize) -> MarketSnapshot {
    let tenor = TenorStructure::semiannual(years);
    MarketSnapshot {
        as_of: NaiveDate::from_ymd_opt(2011, 9, 29).expect("valid date"),
        discounts: (1..=tenor.n)
            .map(|k| {
                let t = tenor.date(k);
                DiscountPillar {
                    maturity_yr: t,
                    df: (-zero_rate(t) * t).exp(),
                }
            })
            .collect(),
        caplet_vols: Vec::new(),
        zciis: (1..=years)
            .map(|y| ZciisQuote {
                years: y,
                rate: zciis_rate(y),
            })
            .collect(),
        infl_options: Vec::new(),
    }
}

/// The reference model: reference drivers with every generator fitted to the curves.
pub fn reference_config(years: usize, settings: &CalibrationSettings) -> Result<ModelConfig> {
    let snap = curve_snapshot(years);
    let ilb = snap.ilb_curve()?;
    let (cfg, _) = fit_term_structure(
        snap.tenor(),
        reference_process(years, settings)?,
        snap.discount(snap.tenor().n),
        &snap.curve_ratios(),
        Some(&ilb),
        settings,
    )?;
    Ok(cfg)
}

/// Full snapshot generated from a model: curves, caplet vols and inflation option prices.
pub fn snapshot_from_model(cfg: &ModelConfig, base: &MarketSnapshot, settings: &CalibrationSettings) -> Result<MarketSnapshot> {
    let tenor = *cfg.tenor();
    let years = tenor.years();
    let mut snap = base.clone();
    snap.caplet_vols.clear();
    snap.infl_options.clear();
    let s0 = cfg.initial_state();
    for y in 1..=years {
        let k = 2 * y;
        let expiry = tenor.date(k - 1);
        let forward = cfg.forward_rate(k, &s0)?;
        let discount = cfg.discount(k)?;
        let prices = ir_caplet(cfg, k, &CAPLET_STRIKES, &settings.contour)?;
        for (strike, p) in CAPLET_STRIKES.iter().zip(prices) {
            let q = OptionQuote {
                kind: OptionKind::IrCaplet,
                k,
                j: 0,
                strike: *strike,
                price: p.price,
            };
            let vol = match implied_vol(cfg, &q) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if vol > 0.0 && tenor.delta * black_vega(forward, *strike, expiry, vol, discount) >= MIN_CAPLET_VEGA {
                snap.caplet_vols.push(CapletVol {
                    expiry_yr: expiry,
                    strike: *strike,
                    vol,
                });
            }
        }
    }
    for y in 1..=years {
        let k = 2 * y;
        let (floor, cap): (Vec<f64>, Vec<f64>) = (
            INFLATION_STRIKES.iter().copied().filter(|s| *s <= 0.01 + 1e-12).collect(),
            INFLATION_STRIKES.iter().copied().filter(|s| *s > 0.01 + 1e-12).collect(),
        );
        for (kind, strikes, tag) in [
            (OptionKind::InflFloorlet, &floor, InflOptionKind::Floorlet),
            (OptionKind::InflCaplet, &cap, InflOptionKind::Caplet),
        ] {
            let prices = price_options(cfg, kind, k, 2, strikes, &settings.contour)?;
            for (strike, p) in strikes.iter().zip(prices) {
                snap.infl_options.push(InflOptionQuote {
                    maturity_yr: y as f64,
                    strike: *strike,
                    kind: tag,
                    price_bp: p.price * 1e4,
                });
            }
        }
    }
    snap.validate()?;
    Ok(snap)
}

/// The bundled synthetic snapshot and the model it was generated from.
pub fn reference_snapshot(settings: &CalibrationSettings) -> Result<(ModelConfig, MarketSnapshot)> {
    let cfg = reference_config(YEARS, settings)?;
    let snap = snapshot_from_model(&cfg, &curve_snapshot(YEARS), settings)?;
    Ok((cfg, snap))
}

/// Caplet quotes of the snapshot for year `y`, repriced in `cfg`; used by diagnostics.
pub fn caplet_quote_grid(cfg: &ModelConfig, snap: &MarketSnapshot, y: usize) -> Result<Vec<(OptionQuote, f64)>> {
    caplet_quotes(cfg.tenor(), snap, y, cfg)
}
