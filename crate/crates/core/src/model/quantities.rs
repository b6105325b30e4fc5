use num_complex::Complex64;

use super::config::{ModelConfig, StateVector};
use super::transform::to_complex;
use crate::error::{Error, Result};

impl ModelConfig {
    /// `P(0, T_k)`; `P(0, T_0) = 1`.
    pub fn discount(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        Ok(self.log_martingale(self.u(k), &self.initial_state())?.exp() * self.numeraire_discount())
    }

    /// `P(t, T_k) / P(t, T) = M_t^{u_k}`.
    pub fn normalized_bond(&self, k: usize, state: &StateVector) -> Result<f64> {
        Ok(self.log_martingale(self.u(k), state)?.exp())
    }

    /// Simple forward rate `F^k(t)` over `[T_{k-1}, T_k]`.
    ///
    /// For `k = 1` only `t = 0` is defined, against `P(0, T_0) = 1`.
    pub fn forward_rate(&self, k: usize, state: &StateVector) -> Result<f64> {
        let delta = self.tenor().delta;
        if k == 0 || k > self.n() {
            return Err(Error::InvalidParameter(format!("forward index {k} out of range")));
        }
        if k == 1 {
            if state.t != 0.0 {
                return Err(Error::InvalidParameter(
                    "the first forward rate is only defined at time zero".into(),
                ));
            }
            return Ok((1.0 / self.discount(1)? - 1.0) / delta);
        }
        if state.t > self.tenor().date(k - 1) + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "forward rate {k} has fixed before t = {}",
                state.t
            )));
        }
        let (a, b) = self.ab_pair_real(state.t, self.u(k - 1), self.u(k))?;
        let log_ratio = a + b.iter().zip(&state.x).map(|(bi, xi)| bi * xi).sum::<f64>();
        Ok(log_ratio.exp_m1() / delta)
    }

    /// Forward CPI `I(t, T_k) = M_t^{v_k} / M_t^{u_k}`.
    pub fn forward_cpi(&self, k: usize, state: &StateVector) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let (a, b) = self.ab_pair_real(state.t, self.v(k), self.u(k))?;
        Ok((a + b.iter().zip(&state.x).map(|(bi, xi)| bi * xi).sum::<f64>()).exp())
    }

    /// Real zero-coupon bond `P_ILB(0, T_k) / I(0)` with `I(0) = 1`.
    pub fn real_bond(&self, k: usize) -> Result<f64> {
        Ok(self.forward_cpi(k, &self.initial_state())? * self.discount(k)?)
    }

    /// Annualized forward inflation `F_I(t, T_{k-j}, T_k)` for `t <= T_{k-j}`, closed form.
    pub fn forward_inflation(&self, k: usize, j: usize, state: &StateVector) -> Result<f64> {
        if j == 0 || j > k || k > self.n() {
            return Err(Error::InvalidParameter(format!(
                "invalid forward inflation indices k={k}, j={j}"
            )));
        }
        let tenor = self.tenor();
        let early = tenor.date(k - j);
        if state.t > early + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "forward inflation requires t <= T_(k-j) = {early}"
            )));
        }
        let p = self.process();
        let big_t = self.horizon();
        let (a_early, b_early) = self.cpi_coefficients(k - j)?;
        let (phi_vk, psi_vk) = p.phi_psi_real(big_t - early, self.v(k))?;
        let a: Vec<f64> = psi_vk.iter().zip(&b_early).map(|(p, b)| p - b).collect();
        let (phi_a, psi_a) = p
            .phi_psi(early - state.t, &to_complex(&a))
            .map_err(|e| e.in_condition("psi_{T-T_(k-j)}(v_k) - B_I^(k-j)"))?;
        let (phi_uk, psi_uk) = p.phi_psi_real(big_t - state.t, self.u(k))?;
        let mut log_growth = phi_vk - a_early + phi_a.re - phi_uk;
        for ((pa, pu), x) in psi_a.iter().zip(&psi_uk).zip(&state.x) {
            log_growth += (pa.re - pu) * x;
        }
        Ok(log_growth.exp_m1() / (tenor.date(k) - early))
    }

    /// Same quantity through the year-on-year MGF at `z = 1`.
    pub fn forward_inflation_via_mgf(&self, k: usize, j: usize, state: &StateVector) -> Result<f64> {
        let m = self.mgf_yoy(k, j, Complex64::new(1.0, 0.0), state)?;
        let tenor = self.tenor();
        Ok((m.re - 1.0) / (tenor.date(k) - tenor.date(k - j)))
    }

    /// Market approximation `I(t, T_k) / I(t, T_{k-j}) - 1`, annualized.
    pub fn forward_inflation_approx(&self, k: usize, j: usize, state: &StateVector) -> Result<f64> {
        let tenor = self.tenor();
        let ratio = self.forward_cpi(k, state)? / self.forward_cpi(k - j, state)?;
        Ok((ratio - 1.0) / (tenor.date(k) - tenor.date(k - j)))
    }

    /// Zero-coupon inflation swap rate for a whole-year maturity.
    pub fn zciis_rate(&self, years: usize) -> Result<f64> {
        let k = self.annual_index(years)?;
        let cpi = self.forward_cpi(k, &self.initial_state())?;
        let m = years as f64 * 2.0 * self.tenor().delta;
        Ok(cpi.powf(1.0 / m) - 1.0)
    }

    /// Year-on-year inflation swap rate over `years` annual periods.
    pub fn yyiis_rate(&self, years: usize) -> Result<f64> {
        self.annual_index(years)?;
        let s0 = self.initial_state();
        let (mut num, mut den) = (0.0, 0.0);
        for y in 1..=years {
            let k = 2 * y;
            let p = self.discount(k)?;
            num += p * self.forward_inflation(k, 2, &s0)?;
            den += p;
        }
        Ok(num / den)
    }

    fn annual_index(&self, years: usize) -> Result<usize> {
        if years == 0 || 2 * years > self.n() {
            return Err(Error::InvalidParameter(format!(
                "maturity of {years} years outside the tenor structure"
            )));
        }
        Ok(2 * years)
    }
}
