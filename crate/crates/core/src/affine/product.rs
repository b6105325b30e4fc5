use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::component::{AffineComponent, Interval};
use crate::error::{Error, Result};

/// Independent coupling of affine components on `R^m_{>=0} x R^n`.
///
/// Nonnegative components come first. `phi` of the product is the sum of the
/// component `phi`s and `psi` acts componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AffineComponent>", into = "Vec<AffineComponent>")]
pub struct ProductProcess {
    components: Vec<AffineComponent>,
    m: usize,
}

/// Componentwise admissible intervals at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBound {
    pub t: f64,
    pub intervals: Vec<Interval>,
}

impl DomainBound {
    /// First component whose real part leaves its interval, if any.
    pub fn check(&self, u: &[Complex64]) -> Result<()> {
        for (i, (iv, ui)) in self.intervals.iter().zip(u).enumerate() {
            if !iv.contains(ui.re) {
                return Err(Error::DomainViolation {
                    component: i,
                    lower: iv.lower,
                    upper: iv.upper,
                    value: ui.re,
                });
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<AffineComponent>> for ProductProcess {
    type Error = Error;

    fn try_from(components: Vec<AffineComponent>) -> Result<Self> {
        ProductProcess::new(components)
    }
}

impl From<ProductProcess> for Vec<AffineComponent> {
    fn from(p: ProductProcess) -> Self {
        p.components
    }
}

impl ProductProcess {
    pub fn new(components: Vec<AffineComponent>) -> Result<Self> {
        let m = components.iter().take_while(|c| c.is_nonnegative()).count();
        if m == 0 {
            return Err(Error::InvalidConfig(
                "product process needs at least one nonnegative component first".into(),
            ));
        }
        if components[m..].iter().any(|c| c.is_nonnegative()) {
            return Err(Error::InvalidConfig(
                "nonnegative components must precede real-valued ones".into(),
            ));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(ProductProcess { components, m })
    }

    pub fn components(&self) -> &[AffineComponent] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &AffineComponent {
        &self.components[i]
    }

    /// Replace one component, keeping the ordering invariant.
    pub fn set_component(&mut self, i: usize, c: AffineComponent) -> Result<()> {
        c.validate()?;
        if c.is_nonnegative() != self.components[i].is_nonnegative() {
            return Err(Error::InvalidConfig(format!(
                "component {i} must keep its state-space type"
            )));
        }
        self.components[i] = c;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.components.len() - self.m
    }

    pub fn x0(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.x0()).collect()
    }

    pub fn domain_bound(&self, t: f64) -> DomainBound {
        DomainBound {
            t,
            intervals: self.components.iter().map(|c| c.admissible(t)).collect(),
        }
    }

    /// `phi_t(u) = sum_i phi^i_t(u^i)`. Zero entries contribute exactly zero and are skipped.
    pub fn phi(&self, t: f64, u: &[Complex64]) -> Result<Complex64> {
        self.check_len(u)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (c, &ui)) in self.components.iter().zip(u).enumerate() {
            if ui == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += c.phi_psi(i, t, ui)?.0;
        }
        Ok(acc)
    }

    /// Componentwise `psi_t(u)`.
    pub fn psi(&self, t: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(u)?;
        self.components
            .iter()
            .zip(u)
            .enumerate()
            .map(|(i, (c, &ui))| {
                if ui == Complex64::new(0.0, 0.0) {
                    Ok(ui)
                } else {
                    Ok(c.phi_psi(i, t, ui)?.1)
                }
            })
            .collect()
    }

    /// `(phi_t(u), psi_t(u))` in one pass.
    pub fn phi_psi(&self, t: f64, u: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
        self.check_len(u)?;
        let mut phi = Complex64::new(0.0, 0.0);
        let mut psi = Vec::with_capacity(u.len());
        for (i, (c, &ui)) in self.components.iter().zip(u).enumerate() {
            if ui == Complex64::new(0.0, 0.0) {
                psi.push(ui);
                continue;
            }
            let (p, s) = c.phi_psi(i, t, ui)?;
            phi += p;
            psi.push(s);
        }
        Ok((phi, psi))
    }

    /// Real-argument convenience: `(phi_t(u), psi_t(u))` for `u` in `R^d`.
    pub fn phi_psi_real(&self, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let uc: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (phi, psi) = self.phi_psi(t, &uc)?;
        Ok((phi.re, psi.iter().map(|z| z.re).collect()))
    }

    /// `log E[exp(u . X_t) | X_0 = x]` for real `u`.
    pub fn log_mgf(&self, t: f64, u: &[f64], x: &[f64]) -> Result<f64> {
        let (phi, psi) = self.phi_psi_real(t, u)?;
        Ok(phi + psi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
    }

    fn check_len(&self, u: &[Complex64]) -> Result<()> {
        if u.len() != self.components.len() {
            return Err(Error::InvalidParameter(format!(
                "argument has length {} but process has {} components",
                u.len(),
                self.components.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::component::{Cir, OuJump};

    fn two() -> ProductProcess {
        ProductProcess::new(vec![
            AffineComponent::Cir(Cir {
                lambda: 0.3,
                theta: 0.5,
                eta: 0.2,
                x0: 0.4,
            }),
            AffineComponent::OuJump(OuJump {
                lambda: 0.8,
                theta: 0.0,
                sigma: 0.2,
                x0: 0.1,
                alpha_plus: 20.0,
                beta_plus: 0.3,
                alpha_minus: 20.0,
                beta_minus: 0.3,
            }),
        ])
        .unwrap()
    }

    #[test]
    fn zero_argument_and_zero_time() {
        let p = two();
        let z = [Complex64::new(0.0, 0.0); 2];
        let (phi, psi) = p.phi_psi(3.0, &z).unwrap();
        assert_eq!(phi, Complex64::new(0.0, 0.0));
        assert_eq!(psi, z.to_vec());
        let u = [Complex64::new(0.2, 1.0), Complex64::new(-0.1, 0.0)];
        let (phi, psi) = p.phi_psi(0.0, &u).unwrap();
        assert_eq!(phi, Complex64::new(0.0, 0.0));
        assert_eq!(psi, u.to_vec());
    }

    #[test]
    fn sums_and_componentwise() {
        let p = two();
        let u = [Complex64::new(0.2, 0.0), Complex64::new(-0.1, 0.0)];
        let (phi, psi) = p.phi_psi(1.0, &u).unwrap();
        let (a0, b0) = p.component(0).phi_psi_unchecked(1.0, u[0]);
        let (a1, b1) = p.component(1).phi_psi_unchecked(1.0, u[1]);
        assert_eq!(phi, a0 + a1);
        assert_eq!(psi, vec![b0, b1]);
    }

    #[test]
    fn ordering_enforced() {
        let comps = two().components().iter().rev().cloned().collect();
        assert!(ProductProcess::new(comps).is_err());
    }

    #[test]
    fn violation_names_component() {
        let p = two();
        let u = [Complex64::new(0.0, 0.0), Complex64::new(25.0, 0.0)];
        match p.phi(1.0, &u).unwrap_err() {
            Error::DomainViolation { component, .. } => assert_eq!(component, 1),
            e => panic!("{e}"),
        }
    }
}
