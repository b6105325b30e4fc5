//! Moment generating functions under the forward measures.
//!
//! Two independent routes are provided: dense evaluators that follow the
//! conditional-expectation identities term by term over every component, and
//! [`LogMgf`], a prepared sparse evaluator for log-prices of the form
//! `Y = A + B . X_t - B' . X_r` used by the Fourier pricer.

use num_complex::Complex64;

use super::config::{ModelConfig, StateVector};
use crate::affine::AffineComponent;
use crate::error::{Error, Result};

pub(crate) fn to_complex(w: &[f64]) -> Vec<Complex64> {
    w.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn dot(a: &[Complex64], x: &[f64]) -> Complex64 {
    a.iter().zip(x).map(|(ai, xi)| ai * xi).sum()
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl ModelConfig {
    /// `M_t^w = E^{Q^T}[exp(w . X_T) | F_t] = exp(phi_{T-t}(w) + psi_{T-t}(w) . X_t)`.
    pub fn martingale(&self, w: &[Complex64], state: &StateVector) -> Result<Complex64> {
        let (phi, psi) = self.process().phi_psi(self.horizon() - state.t, w)?;
        Ok((phi + dot(&psi, &state.x)).exp())
    }

    /// Real `log M_t^w`.
    pub fn log_martingale(&self, w: &[f64], state: &StateVector) -> Result<f64> {
        self.process()
            .log_mgf(self.horizon() - state.t, w, &state.x)
    }

    /// `(A, B)` with `A = phi_{T-t}(w1) - phi_{T-t}(w2)`, `B = psi_{T-t}(w1) - psi_{T-t}(w2)`.
    pub fn ab_pair(
        &self,
        t: f64,
        w1: &[Complex64],
        w2: &[Complex64],
    ) -> Result<(Complex64, Vec<Complex64>)> {
        let h = self.horizon() - t;
        let (p1, s1) = self.process().phi_psi(h, w1)?;
        let (p2, s2) = self.process().phi_psi(h, w2)?;
        Ok((p1 - p2, sub(&s1, &s2)))
    }

    /// Real-valued [`ab_pair`](Self::ab_pair).
    pub fn ab_pair_real(&self, t: f64, w1: &[f64], w2: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = self.ab_pair(t, &to_complex(w1), &to_complex(w2))?;
        Ok((a.re, b.iter().map(|z| z.re).collect()))
    }

    /// `E^{Q^{T_k}}[exp(w . X_r) | F_s]` by the one-step change of measure, dense over all components.
    pub fn forward_measure_mgf(
        &self,
        k: usize,
        w: &[Complex64],
        r: f64,
        s: f64,
        x_s: &[f64],
    ) -> Result<Complex64> {
        self.check_times(&[s, r])?;
        let p = self.process();
        let base = p.psi(self.horizon() - r, &to_complex(self.u(k)))?;
        let shifted = add(&base, w);
        let (phi1, psi1) = p
            .phi_psi(r - s, &shifted)
            .map_err(|e| e.in_condition("psi_{T-r}(u_k) + w"))?;
        let (phi0, psi0) = p.phi_psi(r - s, &base)?;
        Ok((phi1 - phi0 + dot(&sub(&psi1, &psi0), x_s)).exp())
    }

    /// `E^{Q^{T_k}}[exp(u . X_r + w . X_t) | F_s]` for `s <= r <= t <= T`, dense route.
    #[allow(clippy::too_many_arguments)]
    pub fn mgf_two_time(
        &self,
        k: usize,
        u: &[Complex64],
        w: &[Complex64],
        r: f64,
        t: f64,
        s: f64,
        x_s: &[f64],
    ) -> Result<Complex64> {
        self.check_times(&[s, r, t])?;
        let p = self.process();
        let big_t = self.horizon();
        let uk = to_complex(self.u(k));
        let c = p.psi(big_t - t, &uk)?;
        let inner = add(&c, w);
        let (phi_inner, psi_inner) = p
            .phi_psi(t - r, &inner)
            .map_err(|e| e.in_condition("psi_{T-t}(u_k) + w"))?;
        let outer = add(&psi_inner, u);
        // admissibility of psi_{t-r}(psi_{T-t}(u_k) + w) - psi_{T-r}(u_k) + u
        let psi_tr = p.psi(big_t - r, &uk)?;
        p.domain_bound(r - s)
            .check(&sub(&outer, &psi_tr))
            .map_err(|e| e.in_condition("psi_{t-r}(psi_{T-t}(u_k) + w) - psi_{T-r}(u_k) + u"))?;
        let (phi_outer, psi_outer) = p
            .phi_psi(r - s, &outer)
            .map_err(|e| e.in_condition("psi_{t-r}(psi_{T-t}(u_k) + w) - psi_{T-r}(u_k) + u"))?;
        let phi_c = p.phi(t - s, &c)?;
        let psi_ts = p.psi(big_t - s, &uk)?;
        let exponent = phi_inner + phi_outer - phi_c + dot(&sub(&psi_outer, &psi_ts), x_s);
        Ok(exponent.exp())
    }

    /// `A_I^k = A(T_k, v_k, u_k)` and `B_I^k = B(T_k, v_k, u_k)`; zero for `k = 0`.
    pub fn cpi_coefficients(&self, k: usize) -> Result<(f64, Vec<f64>)> {
        if k == 0 {
            return Ok((0.0, vec![0.0; self.dim()]));
        }
        self.ab_pair_real(self.tenor().date(k), self.v(k), self.u(k))
    }

    /// `E^{Q^{T_k}}[I(T_k)^z | F_s]` in the three-factor form obtained from the semiflow
    /// identities, divided by `M_s^{u_k}`.
    pub fn mgf_log_cpi_direct(&self, k: usize, z: Complex64, state: &StateVector) -> Result<Complex64> {
        let p = self.process();
        let big_t = self.horizon();
        let tk = self.tenor().date(k);
        self.check_times(&[state.t, tk])?;
        let vk = to_complex(self.v(k));
        let uk = to_complex(self.u(k));
        let (phi_v, psi_v) = p.phi_psi(big_t - tk, &vk)?;
        let (phi_u, psi_u) = p.phi_psi(big_t - tk, &uk)?;
        let one = Complex64::new(1.0, 0.0);
        let mix: Vec<Complex64> = psi_v
            .iter()
            .zip(&psi_u)
            .map(|(a, b)| z * a + (one - z) * b)
            .collect();
        let (phi_mix, psi_mix) = p
            .phi_psi(tk - state.t, &mix)
            .map_err(|e| e.in_condition("z psi(v_k) + (1 - z) psi(u_k)"))?;
        let m_s = self.martingale(&uk, state)?;
        Ok((z * phi_v + (one - z) * phi_u + phi_mix + dot(&psi_mix, &state.x)).exp() / m_s)
    }

    /// `E^{Q^{T_k}}[I(T_k)^z | F_s]`.
    pub fn mgf_log_cpi(&self, k: usize, z: Complex64, state: &StateVector) -> Result<Complex64> {
        self.log_cpi_mgf(k, state)?.eval(z)
    }

    /// MGF of `Y^k = log(I(T_k) / I(T_{k-j}))` under `Q^{T_k}` given `F_s`, `s <= T_{k-j}`.
    pub fn mgf_yoy(&self, k: usize, j: usize, z: Complex64, state: &StateVector) -> Result<Complex64> {
        self.yoy_mgf(k, j, state)?.eval(z)
    }

    /// Dense route for [`mgf_yoy`](Self::mgf_yoy) through [`mgf_two_time`](Self::mgf_two_time).
    pub fn mgf_yoy_direct(&self, k: usize, j: usize, z: Complex64, state: &StateVector) -> Result<Complex64> {
        let (a_late, b_late) = self.cpi_coefficients(k)?;
        let (a_early, b_early) = self.cpi_coefficients(k - j)?;
        let w: Vec<Complex64> = b_late.iter().map(|&b| z * b).collect();
        let u: Vec<Complex64> = b_early.iter().map(|&b| -z * b).collect();
        let r = self.tenor().date(k - j);
        let t = self.tenor().date(k);
        let m = self.mgf_two_time(k, &u, &w, r, t, state.t, &state.x)?;
        Ok((z * (a_late - a_early)).exp() * m)
    }

    /// Prepared MGF of `log I(T_k)` under `Q^{T_k}` given the state at `s`.
    pub fn log_cpi_mgf(&self, k: usize, state: &StateVector) -> Result<LogMgf> {
        self.check_index(k)?;
        let (a, b) = self.cpi_coefficients(k)?;
        let tk = self.tenor().date(k);
        self.prepare(k, a, &b, tk, None, state)
    }

    /// Prepared MGF of `log(I(T_k)/I(T_{k-j}))` under `Q^{T_k}`.
    pub fn yoy_mgf(&self, k: usize, j: usize, state: &StateVector) -> Result<LogMgf> {
        self.check_index(k)?;
        if j == 0 || j > k {
            return Err(Error::InvalidParameter(format!(
                "lag {j} invalid for tenor index {k}"
            )));
        }
        let (a_late, b_late) = self.cpi_coefficients(k)?;
        let (a_early, b_early) = self.cpi_coefficients(k - j)?;
        let t = self.tenor().date(k);
        let r = self.tenor().date(k - j);
        self.prepare(k, a_late - a_early, &b_late, t, Some((r, b_early)), state)
    }

    /// Prepared MGF of `log(1 + Delta F^k(T_{k-1}))` under `Q^{T_k}`, `k >= 2`.
    pub fn forward_rate_mgf(&self, k: usize, state: &StateVector) -> Result<LogMgf> {
        self.check_index(k)?;
        if k < 2 {
            return Err(Error::InvalidParameter(
                "the first forward rate fixes at time zero".into(),
            ));
        }
        let fix = self.tenor().date(k - 1);
        let (a, b) = self.ab_pair_real(fix, self.u(k - 1), self.u(k))?;
        self.prepare(k, a, &b, fix, None, state)
    }

    fn prepare(
        &self,
        k: usize,
        offset: f64,
        b_late: &[f64],
        t: f64,
        early: Option<(f64, Vec<f64>)>,
        state: &StateVector,
    ) -> Result<LogMgf> {
        let s = state.t;
        let big_t = self.horizon();
        let (r, b_early) = match early {
            Some((r, b)) => (r, b),
            None => (t, vec![0.0; self.dim()]),
        };
        if !(s <= r + 1e-12 && r <= t + 1e-12 && t <= big_t + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "times must satisfy s <= r <= t <= T, got s={s}, r={r}, t={t}"
            )));
        }
        let uk = self.u(k);
        let mut terms = Vec::new();
        for i in 0..self.dim() {
            if b_late[i] == 0.0 && b_early[i] == 0.0 {
                continue;
            }
            let comp = *self.process().component(i);
            let c = comp.phi_psi(i, big_t - t, Complex64::new(uk[i], 0.0))?.1.re;
            let psi_total = comp.phi_psi(i, big_t - s, Complex64::new(uk[i], 0.0))?.1.re;
            let phi_total = comp.phi_psi(i, t - s, Complex64::new(c, 0.0))?.0.re;
            terms.push(MgfTerm {
                comp,
                index: i,
                x: state.x[i],
                c,
                b_late: b_late[i],
                b_early: b_early[i],
                psi_total,
                phi_total,
            });
        }
        Ok(LogMgf {
            offset,
            h_late: t - r,
            h_early: r - s,
            terms,
        })
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n() {
            return Err(Error::InvalidParameter(format!(
                "tenor index {k} outside 1..={}",
                self.n()
            )));
        }
        Ok(())
    }

    fn check_times(&self, times: &[f64]) -> Result<()> {
        let ok = times.windows(2).all(|w| w[0] <= w[1] + 1e-12)
            && times.iter().all(|&t| t >= -1e-12 && t <= self.horizon() + 1e-12);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "times {times:?} must be ordered within [0, T]"
            )))
        }
    }
}

#[derive(Debug, Clone)]
struct MgfTerm {
    comp: AffineComponent,
    index: usize,
    x: f64,
    /// `psi_{T-t}(u_k^i)`
    c: f64,
    b_late: f64,
    b_early: f64,
    /// `psi_{T-s}(u_k^i)`
    psi_total: f64,
    /// `phi_{t-s}(c)`
    phi_total: f64,
}

/// Prepared `Q^{T_k}`-MGF of `Y = A + B . X_t - B' . X_r` given the state at `s <= r <= t`.
///
/// Per component the exponent is
/// `phi_{t-r}(c + zB) + phi_{r-s}(psi_{t-r}(c + zB) - zB') - phi_{t-s}(c)
///  + (psi_{r-s}(psi_{t-r}(c + zB) - zB') - psi_{T-s}(u_k)) x_s`
/// with `c = psi_{T-t}(u_k)`. Components with `B = B' = 0` contribute zero and are dropped.
#[derive(Debug, Clone)]
pub struct LogMgf {
    offset: f64,
    h_late: f64,
    h_early: f64,
    terms: Vec<MgfTerm>,
}

impl LogMgf {
    /// A deterministic log-price: `E[exp(zY)] = exp(z * offset)`.
    pub fn constant(offset: f64) -> Self {
        LogMgf {
            offset,
            h_late: 0.0,
            h_early: 0.0,
            terms: Vec::new(),
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Indices of components the log-price depends on.
    pub fn support(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.index).collect()
    }

    /// `log E[exp(zY)]`.
    pub fn log_eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = z * self.offset;
        for term in &self.terms {
            let inner = Complex64::new(term.c, 0.0) + z * term.b_late;
            let (phi_in, psi_in) = term
                .comp
                .phi_psi(term.index, self.h_late, inner)
                .map_err(|e| e.in_condition("psi_{T-t}(u_k) + zB"))?;
            let outer = psi_in - z * term.b_early;
            let (phi_out, psi_out) = term
                .comp
                .phi_psi(term.index, self.h_early, outer)
                .map_err(|e| e.in_condition("psi_{t-r}(psi_{T-t}(u_k) + zB) - zB'"))?;
            acc += phi_in + phi_out - term.phi_total + (psi_out - term.psi_total) * term.x;
        }
        Ok(acc)
    }

    /// `E[exp(zY)]`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_eval(z)?.exp())
    }

    /// True when the MGF is finite at real `z`.
    pub fn admissible(&self, z: f64) -> bool {
        self.log_eval(Complex64::new(z, 0.0)).is_ok()
    }

    /// Supremum of admissible real arguments in `[from, cap]`, located by bisection.
    pub fn upper_admissible(&self, from: f64, cap: f64) -> Option<f64> {
        if !self.admissible(from) {
            return None;
        }
        if self.admissible(cap) {
            return Some(cap);
        }
        let (mut lo, mut hi) = (from, cap);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.admissible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}
