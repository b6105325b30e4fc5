use super::simulate::{mc_expectations, Ensemble, Estimate, SimulationPlan};
use crate::error::{Error, Result};
use crate::model::{ModelConfig, StateVector};
use crate::pricer::{OptionKind, OptionQuote};

/// `a + b . x`
#[derive(Debug, Clone)]
struct AffineForm {
    a: f64,
    b: Vec<f64>,
}

impl AffineForm {
    fn eval(&self, x: &[f64]) -> f64 {
        self.a + self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }
}

/// `log M_t^w - log M_0^w` as a function of `X_t`.
fn log_density(cfg: &ModelConfig, w: &[f64], t: f64) -> Result<AffineForm> {
    let (phi, psi) = cfg.process().phi_psi_real(cfg.horizon() - t, w)?;
    let m0 = cfg.log_martingale(w, &cfg.initial_state())?;
    Ok(AffineForm { a: phi - m0, b: psi })
}

/// `log M_t^{w1} - log M_t^{w2}` as a function of `X_t`.
fn log_ratio(cfg: &ModelConfig, w1: &[f64], w2: &[f64], t: f64) -> Result<AffineForm> {
    let (a, b) = cfg.ab_pair_real(t, w1, w2)?;
    Ok(AffineForm { a, b })
}

/// Density `dQ^{T_k}/dQ^T` restricted to `F_t`: `M_t^{u_k} / M_0^{u_k}`.
pub fn forward_measure_weight(cfg: &ModelConfig, k: usize, state: &StateVector) -> Result<f64> {
    Ok(log_density(cfg, cfg.u(k), state.t)?.eval(&state.x).exp())
}

/// Weights turning `Q^T` sample means at `T_k` into `Q^{T_k}` expectations.
pub fn reweight_to_forward_measure(ensemble: &Ensemble, cfg: &ModelConfig, k: usize) -> Result<Vec<f64>> {
    let t = cfg.tenor().date(k);
    let ti = ensemble
        .time_index(t)
        .ok_or_else(|| Error::InvalidParameter(format!("ensemble has no observation at T_{k} = {t}")))?;
    let form = log_density(cfg, cfg.u(k), t)?;
    Ok((0..ensemble.paths).map(|p| form.eval(ensemble.x(p, ti)).exp()).collect())
}

/// Sample mean of `weights * values` with its standard error.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let prods: Vec<f64> = values.iter().zip(weights).map(|(v, w)| v * w).collect();
    let mean = prods.iter().sum::<f64>() / n;
    let var = prods.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
        paths: values.len(),
    }
}

/// Payoff at `T_k` of a unit-notional option as a function of the observed states.
struct Payoff {
    weight: AffineForm,
    weight_time: usize,
    /// `(form, time)` pairs whose exponentials multiply to the underlying `e^Y`
    legs: Vec<(AffineForm, usize, f64)>,
    strike: f64,
    call: bool,
    discount: f64,
}

fn payoff(cfg: &ModelConfig, q: &OptionQuote, times: &mut Vec<f64>) -> Result<Payoff> {
    let tenor = cfg.tenor();
    let n = cfg.n();
    if q.k == 0 || q.k > n {
        return Err(Error::InvalidParameter(format!("option index {} out of range", q.k)));
    }
    let mut at = |t: f64| -> usize {
        match times.iter().position(|s| (s - t).abs() < 1e-12) {
            Some(i) => i,
            None => {
                times.push(t);
                times.len() - 1
            }
        }
    };
    let k = q.k;
    let tk = tenor.date(k);
    let weight = log_density(cfg, cfg.u(k), tk)?;
    let weight_time = at(tk);
    let (legs, strike) = match q.kind {
        OptionKind::CpiCall | OptionKind::CpiPut => {
            (vec![(log_ratio(cfg, cfg.v(k), cfg.u(k), tk)?, weight_time, 1.0)], q.strike)
        }
        OptionKind::InflCaplet | OptionKind::InflFloorlet => {
            if q.j == 0 || q.j > k {
                return Err(Error::InvalidParameter(format!("invalid lag j={} for k={k}", q.j)));
            }
            let early = tenor.date(k - q.j);
            let mut legs = vec![(log_ratio(cfg, cfg.v(k), cfg.u(k), tk)?, weight_time, 1.0)];
            if k > q.j {
                legs.push((log_ratio(cfg, cfg.v(k - q.j), cfg.u(k - q.j), early)?, at(early), -1.0));
            }
            (legs, 1.0 + (tk - early) * q.strike)
        }
        OptionKind::IrCaplet | OptionKind::IrFloorlet => {
            let delta = tenor.delta;
            let legs = if k == 1 {
                let f = cfg.forward_rate(1, &cfg.initial_state())?;
                vec![(
                    AffineForm {
                        a: (delta * f).ln_1p(),
                        b: vec![0.0; cfg.dim()],
                    },
                    weight_time,
                    1.0,
                )]
            } else {
                let fix = tenor.date(k - 1);
                vec![(log_ratio(cfg, cfg.u(k - 1), cfg.u(k), fix)?, at(fix), 1.0)]
            };
            (legs, 1.0 + delta * q.strike)
        }
    };
    Ok(Payoff {
        weight,
        weight_time,
        legs,
        strike,
        call: q.kind.is_call(),
        discount: cfg.discount(k)?,
    })
}

/// Monte Carlo prices of a batch of options sharing one simulation.
///
/// Paths are simulated under `Q^T` and reweighted to each option's payment measure.
pub fn mc_price_batch(cfg: &ModelConfig, quotes: &[OptionQuote], plan: &SimulationPlan) -> Result<Vec<Estimate>> {
    let mut raw_times = Vec::new();
    let payoffs: Vec<Payoff> = quotes.iter().map(|q| payoff(cfg, q, &mut raw_times)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..raw_times.len()).collect();
    order.sort_by(|a, b| raw_times[*a].total_cmp(&raw_times[*b]));
    let times: Vec<f64> = order.iter().map(|&i| raw_times[i]).collect();
    let mut slot = vec![0; raw_times.len()];
    for (pos, &i) in order.iter().enumerate() {
        slot[i] = pos;
    }
    let d = cfg.dim();
    let est = mc_expectations(cfg.process(), plan, &times, payoffs.len(), |x, out| {
        let at = |t: usize| &x[slot[t] * d..(slot[t] + 1) * d];
        for (o, p) in out.iter_mut().zip(&payoffs) {
            let y: f64 = p.legs.iter().map(|(f, t, s)| s * f.eval(at(*t))).sum();
            let u = y.exp();
            let intrinsic = if p.call { u - p.strike } else { p.strike - u };
            *o = intrinsic.max(0.0) * p.weight.eval(at(p.weight_time)).exp();
        }
    })?;
    Ok(est
        .iter()
        .zip(&payoffs)
        .map(|(e, p)| Estimate {
            mean: p.discount * e.mean,
            stderr: p.discount * e.stderr,
            paths: e.paths,
        })
        .collect())
}

/// Monte Carlo time-zero price and standard error of one option.
pub fn mc_price(cfg: &ModelConfig, quote: &OptionQuote, plan: &SimulationPlan) -> Result<Estimate> {
    Ok(mc_price_batch(cfg, std::slice::from_ref(quote), plan)?[0])
}
