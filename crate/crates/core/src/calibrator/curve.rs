use serde::{Deserialize, Serialize};

use super::roots::{cumulant_roots, search_interval, RootPolicy, RootSolve};
use crate::affine::{AffineComponent, Interval, ProductProcess};
use crate::error::{Error, Result};
use crate::model::{build_u, build_v, Generators, ModelConfig, TenorStructure};

/// A root solve recorded for the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub stage: String,
    /// `"u_tilde"`, `"u_bar"` or `"v_bar"`
    pub generator: String,
    pub index: usize,
    pub component: usize,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub candidates: Vec<f64>,
    pub policy: Option<RootPolicy>,
}

fn solve_component(
    comp: &AffineComponent,
    horizon: f64,
    scale: f64,
    target: f64,
    tol: f64,
    policy: RootPolicy,
) -> Result<RootSolve> {
    if target.abs() <= 1e-15 {
        return Ok(RootSolve {
            root: 0.0,
            residual: target,
            iterations: 0,
            candidates: vec![0.0],
            policy_applied: false,
        });
    }
    let x0 = comp.x0();
    let kappa = |y: f64| comp.log_mgf(horizon, scale * y, x0);
    let iv = comp.admissible(horizon);
    let iv = Interval {
        lower: iv.lower / scale,
        upper: iv.upper / scale,
    };
    cumulant_roots(kappa, iv, target, tol, policy)
}

fn cumulant_except(process: &ProductProcess, horizon: f64, w: &[f64], skip: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (c, &wi)) in process.components().iter().zip(w).enumerate() {
        if i != skip && wi != 0.0 {
            acc += c.log_mgf(horizon, wi, c.x0())?;
        }
    }
    Ok(acc)
}

/// `u_tilde_k` with `E^{Q^T}[exp(2 u_tilde_k X^0_T)] = P(0,T_k)/P(0,T)`.
pub fn fit_utilde(common: &AffineComponent, horizon: f64, ratios: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ratios.len());
    for (i, &r) in ratios.iter().enumerate() {
        let k = i + 1;
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::RootBracket {
                index: k,
                reason: format!("curve ratio {r} below 1 implies a negative forward"),
            });
        }
        let s = solve_component(common, horizon, 2.0, r.ln(), tol, RootPolicy::Positive).map_err(|e| {
            Error::RootBracket {
                index: k,
                reason: e.to_string(),
            }
        })?;
        out.push(s.root.max(0.0));
    }
    Ok(out)
}

/// Solves `u_bar_k` so that `M_0^{u_k}` equals `ratio`, given `u_tilde` and all `u_bar_{2l-1}`
/// for `l > ceil(k/2)`.
pub fn fit_ubar_index(
    process: &ProductProcess,
    tenor: &TenorStructure,
    g: &mut Generators,
    k: usize,
    ratio: f64,
    tol: f64,
) -> Result<RootRecord> {
    let horizon = tenor.horizon();
    let slot = k.div_ceil(2);
    let mut u = build_u(tenor, g, k);
    u[slot] = 0.0;
    let rest = cumulant_except(process, horizon, &u, slot)?;
    let target = ratio.ln() - rest;
    let comp = process.component(slot);
    let s = solve_component(comp, horizon, 1.0, target, tol, RootPolicy::Positive).map_err(|e| {
        Error::RootBracket {
            index: k,
            reason: e.to_string(),
        }
    })?;
    if s.root < 0.0 {
        if s.root > -1e-14 {
            g.u_bar[k - 1] = 0.0;
        } else {
            return Err(Error::NegativeForward { index: k });
        }
    } else {
        g.u_bar[k - 1] = s.root;
    }
    Ok(RootRecord {
        stage: String::new(),
        generator: "u_bar".into(),
        index: k,
        component: slot,
        value: g.u_bar[k - 1],
        residual: s.residual,
        iterations: s.iterations,
        candidates: s.candidates,
        policy: None,
    })
}

/// Backward iteration `k = N, ..., 1` for every `u_bar_k`.
pub fn fit_ubar(
    process: &ProductProcess,
    tenor: &TenorStructure,
    g: &mut Generators,
    ratios: &[f64],
    tol: f64,
) -> Result<Vec<RootRecord>> {
    (1..=tenor.n)
        .rev()
        .map(|k| fit_ubar_index(process, tenor, g, k, ratios[k - 1], tol))
        .collect()
}

/// `v_tilde_k = u_tilde_k (1 + c k)`.
pub fn fit_vtilde(u_tilde: &[f64], c: f64) -> Vec<f64> {
    u_tilde
        .iter()
        .enumerate()
        .map(|(i, u)| u * (1.0 + c * (i + 1) as f64))
        .collect()
}

/// Solves `v_bar_k` so that `M_0^{v_k}` equals `P_ILB(0,T_k)/P(0,T)`.
pub fn fit_vbar_index(
    process: &ProductProcess,
    tenor: &TenorStructure,
    g: &mut Generators,
    k: usize,
    ilb_ratio: f64,
    tol: f64,
    policy: RootPolicy,
) -> Result<RootRecord> {
    let horizon = tenor.horizon();
    let slot = tenor.years() + k.div_ceil(2);
    let mut v = build_v(tenor, g, k);
    v[slot] = 0.0;
    let rest = cumulant_except(process, horizon, &v, slot)?;
    let target = ilb_ratio.ln() - rest;
    let comp = process.component(slot);
    let s = solve_component(comp, horizon, 1.0, target, tol, policy).map_err(|e| Error::RootBracket {
        index: k,
        reason: e.to_string(),
    })?;
    g.v_bar[k - 1] = s.root;
    if s.policy_applied {
        log::info!(
            "v_bar_{k}: two roots {:?}, policy {:?} selects {}",
            s.candidates,
            policy,
            s.root
        );
    }
    Ok(RootRecord {
        stage: String::new(),
        generator: "v_bar".into(),
        index: k,
        component: slot,
        value: s.root,
        residual: s.residual,
        iterations: s.iterations,
        candidates: s.candidates,
        policy: s.policy_applied.then_some(policy),
    })
}

/// Every `v_bar_k`, `k = 1..N`.
pub fn fit_vbar(
    process: &ProductProcess,
    tenor: &TenorStructure,
    g: &mut Generators,
    ilb: &[f64],
    tol: f64,
    policy: RootPolicy,
) -> Result<Vec<RootRecord>> {
    (1..=tenor.n)
        .map(|k| fit_vbar_index(process, tenor, g, k, ilb[k - 1], tol, policy))
        .collect()
}

/// Numerical check of the shape of `f^k(y) = M_0^{u_k + (y - u_k^i) e_i}` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub k: usize,
    pub component: usize,
    pub nonnegative: bool,
    pub monotone: bool,
    pub convex: bool,
    pub min_slope: f64,
    pub min_second_difference: f64,
}

/// Samples `f^k` in component `i` on `points` grid nodes across the admissible interval.
pub fn check_lemma(cfg: &ModelConfig, k: usize, i: usize, points: usize) -> Result<LemmaCheck> {
    let horizon = cfg.horizon();
    let comp = cfg.process().component(i);
    let (mut lo, hi) = search_interval(comp.admissible(horizon));
    lo = lo.max(-4.0 * hi.abs() - 1.0);
    let u = cfg.u(k);
    let rest = cumulant_except(cfg.process(), horizon, u, i)?;
    let f = |y: f64| -> Result<f64> { Ok((rest + comp.log_mgf(horizon, y, comp.x0())?).exp()) };
    let n = points.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|j| f(lo + h * j as f64)).collect::<Result<_>>()?;
    let scale = vals.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let min_slope = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let min_second = vals
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(LemmaCheck {
        k,
        component: i,
        nonnegative: comp.is_nonnegative(),
        monotone: min_slope >= -1e-12 * scale,
        convex: min_second >= -1e-12 * scale,
        min_slope,
        min_second_difference: min_second,
    })
}
