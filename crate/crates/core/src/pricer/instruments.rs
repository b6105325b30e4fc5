use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::black::{implied_vol_black, implied_vol_shifted_black};
use super::fourier::{fourier_call_batch, fourier_put_batch, ContourSpec, FourierOutcome};
use crate::error::{Error, Result};
use crate::model::{LogMgf, ModelConfig};

/// Shift used for inflation option implied volatilities.
pub const INFLATION_SHIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OptionKind {
    CpiCall,
    CpiPut,
    InflCaplet,
    InflFloorlet,
    IrCaplet,
    IrFloorlet,
}

impl OptionKind {
    pub fn is_call(self) -> bool {
        matches!(self, OptionKind::CpiCall | OptionKind::InflCaplet | OptionKind::IrCaplet)
    }

    pub fn name(self) -> &'static str {
        match self {
            OptionKind::CpiCall => "CPI_CALL",
            OptionKind::CpiPut => "CPI_PUT",
            OptionKind::InflCaplet => "INFL_CAPLET",
            OptionKind::InflFloorlet => "INFL_FLOORLET",
            OptionKind::IrCaplet => "IR_CAPLET",
            OptionKind::IrFloorlet => "IR_FLOORLET",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "CPI_CALL" => OptionKind::CpiCall,
            "CPI_PUT" => OptionKind::CpiPut,
            "INFL_CAPLET" => OptionKind::InflCaplet,
            "INFL_FLOORLET" => OptionKind::InflFloorlet,
            "IR_CAPLET" => OptionKind::IrCaplet,
            "IR_FLOORLET" => OptionKind::IrFloorlet,
            other => return Err(Error::InvalidParameter(format!("unknown option kind {other}"))),
        })
    }
}

/// A unit-notional option on tenor index `k` (lag `j` for inflation options).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub kind: OptionKind,
    pub k: usize,
    #[serde(default)]
    pub j: usize,
    pub strike: f64,
    #[serde(default)]
    pub price: f64,
}

/// Time-zero price with the Fourier diagnostics behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricedOption {
    pub price: f64,
    pub damping: f64,
    pub upper: f64,
    pub panels: usize,
}

impl PricedOption {
    fn from_outcome(o: &FourierOutcome, scale: f64) -> Self {
        PricedOption {
            price: scale * o.value,
            damping: o.damping,
            upper: o.upper,
            panels: o.panels,
        }
    }

    fn deterministic(price: f64) -> Self {
        PricedOption {
            price,
            damping: f64::NAN,
            upper: 0.0,
            panels: 0,
        }
    }
}

/// Forward and discount that an option family is priced against.
struct Underlying {
    mgf: LogMgf,
    discount: f64,
    /// payoff is `(e^Y - strike_map(K))_+`
    strike_map: Box<dyn Fn(f64) -> f64>,
}

impl Underlying {
    fn price(&self, strikes: &[f64], call: bool, spec: &ContourSpec) -> Result<Vec<PricedOption>> {
        let mapped: Vec<f64> = strikes.iter().map(|&k| (self.strike_map)(k)).collect();
        if let Some((k, _)) = strikes.iter().zip(&mapped).find(|(_, m)| m.is_nan() || **m <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "strike {k} maps to a nonpositive payoff strike"
            )));
        }
        if self.mgf.support().is_empty() {
            let f = self.mgf.offset().exp();
            let sign = if call { 1.0 } else { -1.0 };
            return Ok(mapped
                .iter()
                .map(|k| PricedOption::deterministic(self.discount * (sign * (f - k)).max(0.0)))
                .collect());
        }
        let mgf = &self.mgf;
        let outcomes = if call {
            fourier_call_batch(|z| mgf.log_eval(z), &mapped, spec)?
        } else {
            fourier_put_batch(|z| mgf.log_eval(z), &mapped, spec)?
        };
        Ok(outcomes.iter().map(|o| PricedOption::from_outcome(o, self.discount)).collect())
    }
}

fn cpi_underlying(cfg: &ModelConfig, k: usize) -> Result<Underlying> {
    let s0 = cfg.initial_state();
    Ok(Underlying {
        mgf: cfg.log_cpi_mgf(k, &s0)?,
        discount: cfg.discount(k)?,
        strike_map: Box::new(|k| k),
    })
}

fn inflation_underlying(cfg: &ModelConfig, k: usize, j: usize) -> Result<Underlying> {
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    let accrual = tenor.date(k) - tenor.date(k.saturating_sub(j));
    let mgf = cfg.yoy_mgf(k, j, &s0)?;
    Ok(Underlying {
        mgf,
        discount: cfg.discount(k)?,
        strike_map: Box::new(move |kk| 1.0 + accrual * kk),
    })
}

fn ir_underlying(cfg: &ModelConfig, k: usize) -> Result<Underlying> {
    let s0 = cfg.initial_state();
    let delta = cfg.tenor().delta;
    let fwd = cfg.forward_rate(k, &s0)?;
    let mgf = if k == 1 {
        LogMgf::constant((delta * fwd).ln_1p())
    } else {
        cfg.forward_rate_mgf(k, &s0)?
    };
    Ok(Underlying {
        mgf,
        discount: cfg.discount(k)?,
        strike_map: Box::new(move |kk| 1.0 + delta * kk),
    })
}

/// `P(0,T_k) E^{Q^{T_k}}[(I(T_k) - K)_+]`.
pub fn cpi_call(cfg: &ModelConfig, k: usize, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<PricedOption>> {
    cpi_underlying(cfg, k)?.price(strikes, true, spec)
}

/// `P(0,T_k) E^{Q^{T_k}}[(K - I(T_k))_+]`.
pub fn cpi_put(cfg: &ModelConfig, k: usize, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<PricedOption>> {
    cpi_underlying(cfg, k)?.price(strikes, false, spec)
}

/// `P(0,T_k) E^{Q^{T_k}}[(T_k - T_{k-j})(F_I(T_k, T_{k-j}, T_k) - K)_+]`.
pub fn inflation_caplet(
    cfg: &ModelConfig,
    k: usize,
    j: usize,
    strikes: &[f64],
    spec: &ContourSpec,
) -> Result<Vec<PricedOption>> {
    inflation_underlying(cfg, k, j)?.price(strikes, true, spec)
}

/// Inflation floorlet on the put contour.
pub fn inflation_floorlet(
    cfg: &ModelConfig,
    k: usize,
    j: usize,
    strikes: &[f64],
    spec: &ContourSpec,
) -> Result<Vec<PricedOption>> {
    inflation_underlying(cfg, k, j)?.price(strikes, false, spec)
}

/// Caplet on `F^k` fixing at `T_{k-1}`, paying `Delta (F^k - K)_+` at `T_k`.
pub fn ir_caplet(cfg: &ModelConfig, k: usize, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<PricedOption>> {
    ir_underlying(cfg, k)?.price(strikes, true, spec)
}

/// Interest-rate floorlet on the put contour.
pub fn ir_floorlet(cfg: &ModelConfig, k: usize, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<PricedOption>> {
    ir_underlying(cfg, k)?.price(strikes, false, spec)
}

fn underlying(cfg: &ModelConfig, kind: OptionKind, k: usize, j: usize) -> Result<Underlying> {
    match kind {
        OptionKind::CpiCall | OptionKind::CpiPut => cpi_underlying(cfg, k),
        OptionKind::InflCaplet | OptionKind::InflFloorlet => inflation_underlying(cfg, k, j),
        OptionKind::IrCaplet | OptionKind::IrFloorlet => ir_underlying(cfg, k),
    }
}

/// Strikes at the given moneyness levels, in standard deviations of the log underlying
/// under the payment measure around its mean.
pub fn strike_grid(cfg: &ModelConfig, kind: OptionKind, k: usize, j: usize, moneyness: &[f64]) -> Result<Vec<f64>> {
    let und = underlying(cfg, kind, k, j)?;
    let kappa = |z: f64| -> Result<f64> { Ok(und.mgf.log_eval(Complex64::new(z, 0.0))?.re) };
    let h = 1e-3;
    let (up, mid, down) = (kappa(h)?, kappa(0.0)?, kappa(-h)?);
    let mean = (up - down) / (2.0 * h);
    let sd = ((up - 2.0 * mid + down) / (h * h)).max(0.0).sqrt();
    let tenor = cfg.tenor();
    let scale = match kind {
        OptionKind::CpiCall | OptionKind::CpiPut => None,
        OptionKind::InflCaplet | OptionKind::InflFloorlet => Some(tenor.date(k) - tenor.date(k - j)),
        OptionKind::IrCaplet | OptionKind::IrFloorlet => Some(tenor.delta),
    };
    Ok(moneyness
        .iter()
        .map(|m| {
            let x = (mean + m * sd).exp();
            match scale {
                None => x,
                Some(a) => (x - 1.0) / a,
            }
        })
        .collect())
}

/// Prices a batch of same-kind options on one `(k, j)`.
pub fn price_options(
    cfg: &ModelConfig,
    kind: OptionKind,
    k: usize,
    j: usize,
    strikes: &[f64],
    spec: &ContourSpec,
) -> Result<Vec<PricedOption>> {
    underlying(cfg, kind, k, j)?.price(strikes, kind.is_call(), spec)
}

/// Implied volatility of a time-zero model or market price.
///
/// Interest-rate options use Black on `F^k(0)` with expiry `T_{k-1}`; inflation options use
/// shifted Black on the CPI-ratio approximation of the forward with expiry `T_k`; CPI options
/// use Black on the forward CPI.
pub fn implied_vol(cfg: &ModelConfig, quote: &OptionQuote) -> Result<f64> {
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    let k = quote.k;
    let call = quote.kind.is_call();
    let discount = cfg.discount(k)?;
    match quote.kind {
        OptionKind::CpiCall | OptionKind::CpiPut => {
            let fwd = cfg.forward_cpi(k, &s0)?;
            implied_vol_black(fwd, quote.strike, tenor.date(k), quote.price, discount, call)
        }
        OptionKind::InflCaplet | OptionKind::InflFloorlet => {
            let accrual = tenor.date(k) - tenor.date(k - quote.j);
            let fwd = cfg.forward_inflation_approx(k, quote.j, &s0)?;
            implied_vol_shifted_black(
                fwd,
                quote.strike,
                tenor.date(k),
                quote.price / accrual,
                discount,
                INFLATION_SHIFT,
                call,
            )
        }
        OptionKind::IrCaplet | OptionKind::IrFloorlet => {
            let delta = tenor.delta;
            let fwd = cfg.forward_rate(k, &s0)?;
            implied_vol_black(fwd, quote.strike, tenor.date(k - 1), quote.price / delta, discount, call)
        }
    }
}
