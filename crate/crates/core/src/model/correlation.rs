use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use crate::error::{Error, Result};

/// A log-quantity that is affine in `X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantitySelector {
    /// `log(1 + Delta F^k(t))`, `k >= 2`
    ForwardRate { k: usize },
    /// `log I(t, T_k)`
    ForwardCpi { k: usize },
    /// `log(1 + (T_k - T_{k-j}) F_I(t, T_{k-j}, T_k))`
    ForwardInflation { k: usize, j: usize },
}

impl ModelConfig {
    /// Loading vector `B_t` of the selected quantity on the driver state.
    pub fn quantity_loading(&self, q: QuantitySelector, t: f64) -> Result<Vec<f64>> {
        match q {
            QuantitySelector::ForwardRate { k } => {
                if k < 2 || k > self.n() {
                    return Err(Error::InvalidParameter(format!("forward index {k}")));
                }
                Ok(self.ab_pair_real(t, self.u(k - 1), self.u(k))?.1)
            }
            QuantitySelector::ForwardCpi { k } => {
                if k == 0 || k > self.n() {
                    return Err(Error::InvalidParameter(format!("CPI index {k}")));
                }
                Ok(self.ab_pair_real(t, self.v(k), self.u(k))?.1)
            }
            QuantitySelector::ForwardInflation { k, j } => {
                if j == 0 || j > k || k > self.n() {
                    return Err(Error::InvalidParameter(format!("inflation indices {k}, {j}")));
                }
                let early = self.tenor().date(k - j);
                let p = self.process();
                let big_t = self.horizon();
                let (_, b_early) = self.cpi_coefficients(k - j)?;
                let psi_vk = p.phi_psi_real(big_t - early, self.v(k))?.1;
                let a: Vec<f64> = psi_vk.iter().zip(&b_early).map(|(p, b)| p - b).collect();
                let psi_a = p.phi_psi_real(early - t, &a)?.1;
                let psi_uk = p.phi_psi_real(big_t - t, self.u(k))?.1;
                Ok(psi_a.iter().zip(&psi_uk).map(|(a, b)| a - b).collect())
            }
        }
    }

    /// Correlation of two selected quantities at time `t` under `Q^T`, seen from time zero.
    ///
    /// Components are independent, so only the diagonal variances enter.
    pub fn correlation(&self, qa: QuantitySelector, qb: QuantitySelector, t: f64) -> Result<f64> {
        let ba = self.quantity_loading(qa, t)?;
        let bb = self.quantity_loading(qb, t)?;
        let var: Vec<f64> = self
            .process()
            .components()
            .iter()
            .map(|c| c.variance(t))
            .collect();
        let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
        for i in 0..var.len() {
            cov += ba[i] * bb[i] * var[i];
            va += ba[i] * ba[i] * var[i];
            vb += bb[i] * bb[i] * var[i];
        }
        if va <= 0.0 || vb <= 0.0 {
            return Ok(0.0);
        }
        Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
    }
}
