use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contour and quadrature settings for Fourier inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContourSpec {
    /// Call damping `R > 1`; `None` picks the midpoint of the admissible range.
    pub damping: Option<f64>,
    /// Put damping `R < 0`; `None` picks the midpoint of the admissible range.
    pub put_damping: Option<f64>,
    /// Upper end of the range searched for the default damping.
    pub max_damping: f64,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Absolute tolerance on the undiscounted expectation.
    pub tolerance: f64,
    /// Hard cap on the truncation point.
    pub max_u: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            damping: None,
            put_damping: None,
            max_damping: 3.0,
            nodes: 16,
            tolerance: 1e-12,
            max_u: 1e7,
        }
    }
}

/// One Fourier-inverted expectation with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOutcome {
    pub value: f64,
    pub damping: f64,
    pub upper: f64,
    pub panels: usize,
    pub tail: f64,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Result<Self> {
        let n = NonZeroUsize::new(n.max(2))
            .ok_or_else(|| Error::InvalidParameter("quadrature needs at least one node".into()))?;
        let q = GaussLegendre::new(n);
        let (nodes, weights) = q.iter().map(|&(x, w)| (x, w)).unzip();
        Ok(Rule { nodes, weights })
    }
}

/// Supremum of real `z` in `[from, cap]` where `admissible(z)` holds, or `None` if `from` fails.
pub fn admissible_upper<F: Fn(f64) -> bool>(admissible: F, from: f64, cap: f64) -> Option<f64> {
    if !admissible(from) {
        return None;
    }
    if admissible(cap) {
        return Some(cap);
    }
    let (mut lo, mut hi) = (from, cap);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Default damping for a log-MGF: midpoint of `(1, R_max)` for calls, of `(R_min, 0)` for puts.
pub fn default_damping<F>(log_mgf: &F, spec: &ContourSpec, call: bool) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let ok = |z: f64| log_mgf(Complex64::new(z, 0.0)).is_ok_and(|v| v.re.is_finite());
    if call {
        if let Some(r) = spec.damping {
            if r <= 1.0 {
                return Err(Error::Contour(format!("call damping {r} must exceed 1")));
            }
            return Ok(r);
        }
        match admissible_upper(ok, 1.0 + 1e-9, spec.max_damping) {
            Some(r_max) if r_max > 1.0 + 1e-6 => Ok(0.5 * (1.0 + r_max)),
            _ => Err(Error::Contour("moment generating function not finite at any R > 1".into())),
        }
    } else {
        if let Some(r) = spec.put_damping {
            if r >= 0.0 {
                return Err(Error::Contour(format!("put damping {r} must be negative")));
            }
            return Ok(r);
        }
        match admissible_upper(|z| ok(-z), 1e-9, spec.max_damping) {
            Some(r_min) if r_min > 1e-6 => Ok(-0.5 * r_min),
            _ => Err(Error::Contour("moment generating function not finite at any R < 0".into())),
        }
    }
}

/// `E[(e^Y - K)_+]` for every strike in `strikes`, from the log-MGF of `Y`.
///
/// All strikes share the same MGF evaluations. The integrand is
/// `K/pi Re(M(iu + R) K^{-(iu + R)} / ((iu + R)(iu + R - 1)))` on `[0, inf)`.
pub fn fourier_call_batch<F>(log_mgf: F, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<FourierOutcome>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    fourier_batch(log_mgf, strikes, spec, true)
}

/// `E[(K - e^Y)_+]` from the same integrand on a contour with `R < 0`.
pub fn fourier_put_batch<F>(log_mgf: F, strikes: &[f64], spec: &ContourSpec) -> Result<Vec<FourierOutcome>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    fourier_batch(log_mgf, strikes, spec, false)
}

fn fourier_batch<F>(log_mgf: F, strikes: &[f64], spec: &ContourSpec, call: bool) -> Result<Vec<FourierOutcome>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if strikes.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(k) = strikes.iter().find(|&&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::InvalidParameter(format!("strike {k} must be positive")));
    }
    let r = default_damping(&log_mgf, spec, call)?;
    let at_r = log_mgf(Complex64::new(r, 0.0)).map_err(|e| Error::Contour(e.to_string()))?;
    if !at_r.re.is_finite() {
        return Err(Error::Contour(format!("MGF infinite at R = {r}")));
    }
    let rule = Rule::new(spec.nodes)?;
    let log_k: Vec<f64> = strikes.iter().map(|k| k.ln()).collect();

    // scale of the log-price around the contour
    let h = 1e-4;
    let l = |z: f64| log_mgf(Complex64::new(z, 0.0)).map(|v| v.re);
    let (mean, sd) = match (l(r + h), l(r - h)) {
        (Ok(up), Ok(dn)) => {
            let m = (up - dn) / (2.0 * h);
            let v = ((up - 2.0 * at_r.re + dn) / (h * h)).max(1e-12);
            (m, v.sqrt())
        }
        _ => (0.0, 1.0),
    };
    let freq = log_k
        .iter()
        .map(|lk| (mean - lk).abs())
        .fold(1e-3, f64::max);
    let max_width = (2.0 * PI / freq).min(50.0 / sd.max(1e-3));
    let mut width = (0.5 / sd.max(1e-6)).min(max_width).max(1e-3);

    let integrand = |u: f64, out: &mut [f64]| -> Result<()> {
        let z = Complex64::new(r, u);
        let lm = log_mgf(z)?;
        let denom = z * (z - 1.0);
        for (o, lk) in out.iter_mut().zip(&log_k) {
            *o = ((lm - z * lk).exp() / denom).re;
        }
        Ok(())
    };
    let envelope = |u: f64| -> Result<Vec<f64>> {
        let z = Complex64::new(r, u);
        let lm = log_mgf(z)?;
        let d = (z * (z - 1.0)).norm();
        Ok(log_k
            .iter()
            .zip(strikes)
            .map(|(lk, k)| (lm.re - r * lk).exp() / d * k / PI)
            .collect())
    };

    let nk = strikes.len();
    let mut total = vec![0.0; nk];
    let mut a = 0.0;
    let mut panels = 0usize;
    let mut buf = vec![0.0; nk];
    let panel = |lo: f64, hi: f64, buf: &mut Vec<f64>| -> Result<Vec<f64>> {
        let (c, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc = vec![0.0; nk];
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            integrand(c + hw * x, buf)?;
            for (a, v) in acc.iter_mut().zip(buf.iter()) {
                *a += w * hw * v;
            }
        }
        Ok(acc)
    };
    loop {
        let b = a + width;
        let mut stack = vec![(a, b, panel(a, b, &mut buf)?, 0u32)];
        let mut split = false;
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = panel(lo, mid, &mut buf)?;
            let right = panel(mid, hi, &mut buf)?;
            panels += 1;
            let err = whole
                .iter()
                .zip(left.iter().zip(&right))
                .map(|(w, (l, r))| (w - l - r).abs())
                .fold(0.0, f64::max);
            let local_tol = spec.tolerance * (hi - lo) / (hi - lo).max(width);
            if err > local_tol.max(1e-15) && depth < 30 {
                split = true;
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            } else {
                for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
                    *t += l + r;
                }
            }
        }
        a = b;
        let env = envelope(a)?;
        let tail = env.iter().map(|e| e * a).fold(0.0, f64::max);
        if tail < spec.tolerance && a > 4.0 * (0.5 / sd.max(1e-6)).min(max_width) {
            return Ok(total
                .iter()
                .zip(strikes)
                .map(|(t, k)| FourierOutcome {
                    value: (k / PI * t).max(0.0),
                    damping: r,
                    upper: a,
                    panels,
                    tail,
                })
                .collect());
        }
        if a > spec.max_u {
            return Err(Error::Quadrature {
                tail,
                tolerance: spec.tolerance,
                upper: a,
            });
        }
        if !split {
            width = (width * 1.5).min(max_width);
        }
    }
}

/// Single-strike [`fourier_call_batch`].
pub fn fourier_call<F>(log_mgf: F, strike: f64, spec: &ContourSpec) -> Result<FourierOutcome>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok(fourier_call_batch(log_mgf, &[strike], spec)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(mu: f64, var: f64) -> impl Fn(Complex64) -> Result<Complex64> {
        move |z| Ok(z * mu + 0.5 * var * z * z)
    }

    fn black_scholes(f: f64, k: f64, vol: f64) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::standard();
        let d1 = ((f / k).ln() + 0.5 * vol * vol) / vol;
        f * n.cdf(d1) - k * n.cdf(d1 - vol)
    }

    #[test]
    fn point_mass_gives_intrinsic() {
        let f: f64 = 1.3;
        let spec = ContourSpec {
            tolerance: 1e-7,
            ..Default::default()
        };
        let out = fourier_call(|z| Ok(z * f.ln()), 1.0, &spec).unwrap();
        assert!((out.value - 0.3).abs() < 1e-8, "{}", out.value);
    }

    #[test]
    fn lognormal_matches_black_scholes() {
        let (f, vol) = (100.0_f64, 0.2);
        let mgf = gaussian(f.ln() - 0.5 * vol * vol, vol * vol);
        let out = fourier_call(mgf, 100.0, &ContourSpec::default()).unwrap();
        assert!((out.value - 7.965567455405804).abs() < 1e-9, "{}", out.value);
        assert!((black_scholes(f, 100.0, vol) - 7.965567455405804).abs() < 1e-12);
    }

    #[test]
    fn batch_agrees_with_single_strikes() {
        let vol = 0.05;
        let mgf = gaussian(-0.5 * vol * vol, vol * vol);
        let strikes = [0.9, 0.97, 1.0, 1.04, 1.2];
        let batch = fourier_call_batch(&mgf, &strikes, &ContourSpec::default()).unwrap();
        for (k, b) in strikes.iter().zip(&batch) {
            let exact = black_scholes(1.0, *k, vol);
            assert!((b.value - exact).abs() < 1e-11, "{k}: {} vs {exact}", b.value);
        }
    }

    #[test]
    fn damping_and_nodes_do_not_move_price() {
        let vol = 0.3;
        let mgf = gaussian(0.1 - 0.5 * vol * vol, vol * vol);
        let base = fourier_call(&mgf, 1.05, &ContourSpec::default()).unwrap().value;
        for spec in [
            ContourSpec { damping: Some(1.5), ..Default::default() },
            ContourSpec { damping: Some(2.5), ..Default::default() },
            ContourSpec { nodes: 32, ..Default::default() },
        ] {
            let v = fourier_call(&mgf, 1.05, &spec).unwrap().value;
            assert!((v - base).abs() < 1e-10);
        }
    }

    #[test]
    fn put_contour_matches_parity() {
        let vol = 0.25;
        let mgf = gaussian(-0.5 * vol * vol, vol * vol);
        let strikes = [0.7, 0.95, 1.0, 1.3];
        let puts = fourier_put_batch(&mgf, &strikes, &ContourSpec::default()).unwrap();
        for (k, p) in strikes.iter().zip(&puts) {
            assert!(p.damping < 0.0);
            let exact = black_scholes(1.0, *k, vol) - (1.0 - k);
            assert!((p.value - exact).abs() < 1e-11, "{k}: {} vs {exact}", p.value);
        }
        let bad = ContourSpec {
            put_damping: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(fourier_put_batch(&mgf, &[1.0], &bad), Err(Error::Contour(_))));
    }

    #[test]
    fn inadmissible_damping_is_a_contour_error() {
        // exponential(1) log-price: MGF finite only for Re z < 1
        let mgf = |z: Complex64| {
            if z.re >= 1.0 {
                Err(Error::InvalidParameter("outside".into()))
            } else {
                Ok(-(Complex64::new(1.0, 0.0) - z).ln())
            }
        };
        assert!(matches!(
            fourier_call(mgf, 1.0, &ContourSpec::default()),
            Err(Error::Contour(_))
        ));
    }

    #[test]
    fn slow_decay_hits_truncation_cap() {
        let spec = ContourSpec {
            max_u: 1e3,
            ..Default::default()
        };
        assert!(matches!(
            fourier_call(|z| Ok(z * 0.2), 1.0, &spec),
            Err(Error::Quadrature { .. })
        ));
    }
}
