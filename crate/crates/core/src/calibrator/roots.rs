use serde::{Deserialize, Serialize};

use crate::affine::Interval;
use crate::error::{Error, Result};

/// Which root of a convex cumulant equation to keep when there are two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RootPolicy {
    #[default]
    SmallestAbs,
    Negative,
    Positive,
}

/// Outcome of one root solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSolve {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Every root located, ascending.
    pub candidates: Vec<f64>,
    pub policy_applied: bool,
}

/// Root of `f` in `[lo, hi]` given a sign change, by secant steps safeguarded with bisection.
pub fn bisect_secant<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    if flo == 0.0 {
        return Ok((lo, 0.0, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0.0, 0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSolution(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let (mut best, mut fbest) = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let mut use_secant = true;
    for it in 1..=300 {
        let mid = 0.5 * (lo + hi);
        let mut x = if use_secant {
            hi - fhi * (hi - lo) / (fhi - flo)
        } else {
            mid
        };
        if !(x > lo && x < hi) {
            x = mid;
        }
        let fx = f(x)?;
        if fx.abs() < fbest.abs() {
            best = x;
            fbest = fx;
        }
        let width = hi - lo;
        if fx == 0.0 {
            return Ok((x, 0.0, it));
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        // alternate to bisection whenever the bracket fails to halve
        use_secant = hi - lo < 0.5 * width;
        if fbest.abs() <= tol * 1e-3 || hi - lo <= 4.0 * f64::EPSILON * best.abs().max(1e-300) {
            return Ok((best, fbest, it));
        }
    }
    if fbest.abs() <= tol {
        Ok((best, fbest, 300))
    } else {
        Err(Error::NoSolution(format!("no convergence, residual {fbest}")))
    }
}

/// Minimum of a convex function on `[lo, hi]` by golden-section search.
pub fn convex_argmin<F>(f: &F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Largest magnitude searched on an unbounded side of the domain.
pub const SEARCH_LIMIT: f64 = 1e4;

/// Effective closed search interval strictly inside an open admissible interval.
pub fn search_interval(iv: Interval) -> (f64, f64) {
    let lo = if iv.lower.is_finite() { iv.lower } else { -SEARCH_LIMIT };
    let hi = if iv.upper.is_finite() { iv.upper } else { SEARCH_LIMIT };
    let pad = 1e-10 * (hi - lo);
    (lo + pad, hi - pad)
}

/// Solves `kappa(y) = target` for a convex cumulant `kappa` with `kappa(0) = 0` on `iv`.
///
/// Locates the minimum first, then each root on either side; with two roots the policy picks one.
pub fn cumulant_roots<F>(kappa: F, iv: Interval, target: f64, tol: f64, policy: RootPolicy) -> Result<RootSolve>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = search_interval(iv);
    let (m, fmin) = convex_argmin(&kappa, lo, hi)?;
    if fmin > target + tol {
        return Err(Error::NoSolution(format!(
            "target {target} below the cumulant minimum {fmin} at {m}"
        )));
    }
    let g = |y: f64| kappa(y).map(|v| v - target);
    let mut found = Vec::new();
    let mut iterations = 0;
    if fmin >= target - tol {
        found.push((m, fmin - target));
    } else {
        if g(lo)? >= 0.0 {
            let (r, res, it) = bisect_secant(g, lo, m, tol)?;
            found.push((r, res));
            iterations += it;
        }
        if g(hi)? >= 0.0 {
            let (r, res, it) = bisect_secant(g, m, hi, tol)?;
            found.push((r, res));
            iterations += it;
        }
    }
    if found.is_empty() {
        return Err(Error::NoSolution(format!(
            "target {target} not reached inside ({}, {})",
            iv.lower, iv.upper
        )));
    }
    let candidates: Vec<f64> = found.iter().map(|r| r.0).collect();
    let pick = if found.len() == 1 {
        0
    } else {
        match policy {
            RootPolicy::SmallestAbs => {
                if found[0].0.abs() <= found[1].0.abs() {
                    0
                } else {
                    1
                }
            }
            RootPolicy::Negative => 0,
            RootPolicy::Positive => 1,
        }
    };
    Ok(RootSolve {
        root: found[pick].0,
        residual: found[pick].1,
        iterations,
        candidates,
        policy_applied: found.len() > 1,
    })
}
