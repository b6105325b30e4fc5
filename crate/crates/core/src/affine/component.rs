//! The three one-dimensional affine drivers and their closed-form transforms.
//!
//! Each component `X` satisfies `E[exp(u X_t) | X_0 = x] = exp(phi_t(u) + psi_t(u) x)`
//! for `Re(u)` inside a time-dependent interval. Logarithms are always taken of
//! quantities whose real part is positive on that interval, so the principal
//! branch is continuous along any contour that passes the domain check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the printed domain bound that is treated as admissible.
pub const DOMAIN_MARGIN: f64 = 0.999;

/// Below this `|1 - alpha * 2 eta^2 / lambda|` the CIR jump term switches to its series form.
const RESONANCE_EPS: f64 = 1e-6;

/// Square-root diffusion `dX = -lambda (X - theta) dt + 2 eta sqrt(X) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cir {
    pub lambda: f64,
    pub theta: f64,
    pub eta: f64,
    pub x0: f64,
}

/// CIR diffusion plus compound Poisson jumps with exponential marks of mean `1/alpha`
/// arriving at rate `lambda * beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirJump {
    pub lambda: f64,
    pub theta: f64,
    pub eta: f64,
    pub x0: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Ornstein-Uhlenbeck diffusion with two-sided exponential jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuJump {
    pub lambda: f64,
    pub theta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub alpha_plus: f64,
    pub beta_plus: f64,
    pub alpha_minus: f64,
    pub beta_minus: f64,
}

/// One independent driver of the product process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AffineComponent {
    #[serde(rename = "CIR")]
    Cir(Cir),
    #[serde(rename = "CIRJump")]
    CirJump(CirJump),
    #[serde(rename = "OUJump")]
    OuJump(OuJump),
}

/// Admissible interval for `Re(u)` of one component at a fixed horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    /// The interval shrunk towards zero by [`DOMAIN_MARGIN`].
    pub fn with_margin(self) -> Interval {
        Interval {
            lower: self.lower * DOMAIN_MARGIN,
            upper: self.upper * DOMAIN_MARGIN,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

impl Cir {
    /// True when the process never reaches zero.
    pub fn strictly_positive(&self) -> bool {
        self.lambda * self.theta / 2.0 > self.eta * self.eta
    }
}

fn cir_upper(lambda: f64, eta: f64, t: f64) -> f64 {
    let q = 2.0 * eta * eta / lambda * (-(-lambda * t).exp_m1());
    if q > 0.0 {
        1.0 / q
    } else {
        f64::INFINITY
    }
}

/// `(phi, psi)` of the pure CIR part; `e = exp(-lambda t)`.
fn cir_phi_psi(lambda: f64, theta: f64, eta: f64, t: f64, u: Complex64) -> (Complex64, Complex64) {
    let c = 2.0 * eta * eta / lambda;
    let one_minus_e = -(-lambda * t).exp_m1();
    let e = 1.0 - one_minus_e;
    let denom = Complex64::new(1.0, 0.0) - c * one_minus_e * u;
    debug_assert!(denom.re > 0.0);
    let psi = e * u / denom;
    let phi = -(theta / c) * denom.ln();
    (phi, psi)
}

impl AffineComponent {
    pub fn lambda(&self) -> f64 {
        match self {
            AffineComponent::Cir(c) => c.lambda,
            AffineComponent::CirJump(c) => c.lambda,
            AffineComponent::OuJump(c) => c.lambda,
        }
    }

    pub fn x0(&self) -> f64 {
        match self {
            AffineComponent::Cir(c) => c.x0,
            AffineComponent::CirJump(c) => c.x0,
            AffineComponent::OuJump(c) => c.x0,
        }
    }

    pub fn set_x0(&mut self, x0: f64) {
        match self {
            AffineComponent::Cir(c) => c.x0 = x0,
            AffineComponent::CirJump(c) => c.x0 = x0,
            AffineComponent::OuJump(c) => c.x0 = x0,
        }
    }

    /// Nonnegative state space (CIR kinds) versus the real line.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, AffineComponent::OuJump(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AffineComponent::Cir(_) => "CIR",
            AffineComponent::CirJump(_) => "CIRJump",
            AffineComponent::OuJump(_) => "OUJump",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("{}: {msg}", self.kind_name())));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            AffineComponent::Cir(c) => {
                if !finite(&[c.lambda, c.theta, c.eta, c.x0]) {
                    return bad("non-finite parameter");
                }
                if !(c.lambda > 0.0 && c.theta >= 0.0 && c.eta > 0.0 && c.x0 >= 0.0) {
                    return bad("requires lambda > 0, theta >= 0, eta > 0, x0 >= 0");
                }
            }
            AffineComponent::CirJump(c) => {
                if !finite(&[c.lambda, c.theta, c.eta, c.x0, c.alpha, c.beta]) {
                    return bad("non-finite parameter");
                }
                if !(c.lambda > 0.0 && c.theta >= 0.0 && c.eta > 0.0 && c.x0 >= 0.0) {
                    return bad("requires lambda > 0, theta >= 0, eta > 0, x0 >= 0");
                }
                if !(c.alpha > 0.0 && c.beta >= 0.0) {
                    return bad("requires alpha > 0, beta >= 0");
                }
            }
            AffineComponent::OuJump(c) => {
                if !finite(&[
                    c.lambda,
                    c.theta,
                    c.sigma,
                    c.x0,
                    c.alpha_plus,
                    c.beta_plus,
                    c.alpha_minus,
                    c.beta_minus,
                ]) {
                    return bad("non-finite parameter");
                }
                if !(c.lambda > 0.0 && c.sigma >= 0.0) {
                    return bad("requires lambda > 0, sigma >= 0");
                }
                if !(c.alpha_plus > 0.0
                    && c.alpha_minus > 0.0
                    && c.beta_plus >= 0.0
                    && c.beta_minus >= 0.0)
                {
                    return bad("requires alpha± > 0, beta± >= 0");
                }
            }
        }
        Ok(())
    }

    /// Printed validity interval for `Re(u)` at horizon `t` (no margin applied).
    pub fn interval(&self, t: f64) -> Interval {
        match *self {
            AffineComponent::Cir(c) => Interval {
                lower: f64::NEG_INFINITY,
                upper: cir_upper(c.lambda, c.eta, t),
            },
            AffineComponent::CirJump(c) => {
                let one_minus_e = -(-c.lambda * t).exp_m1();
                let e = 1.0 - one_minus_e;
                let jump_bound = c.alpha / (e + one_minus_e * 2.0 * c.eta * c.eta * c.alpha / c.lambda);
                Interval {
                    lower: f64::NEG_INFINITY,
                    upper: cir_upper(c.lambda, c.eta, t).min(jump_bound).min(c.alpha),
                }
            }
            AffineComponent::OuJump(c) => Interval {
                lower: -c.alpha_minus,
                upper: c.alpha_plus,
            },
        }
    }

    /// Admissible interval used by every checked evaluation.
    pub fn admissible(&self, t: f64) -> Interval {
        self.interval(t).with_margin()
    }

    pub(crate) fn check(&self, index: usize, t: f64, u: Complex64) -> Result<()> {
        let iv = self.admissible(t);
        if iv.contains(u.re) && u.im.is_finite() {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                component: index,
                lower: iv.lower,
                upper: iv.upper,
                value: u.re,
            })
        }
    }

    pub fn phi(&self, t: f64, u: Complex64) -> Result<Complex64> {
        self.check(0, t, u)?;
        Ok(self.phi_psi_unchecked(t, u).0)
    }

    pub fn psi(&self, t: f64, u: Complex64) -> Result<Complex64> {
        self.check(0, t, u)?;
        Ok(self.phi_psi_unchecked(t, u).1)
    }

    /// Both transforms with the domain check; `index` labels errors.
    pub fn phi_psi(&self, index: usize, t: f64, u: Complex64) -> Result<(Complex64, Complex64)> {
        self.check(index, t, u)?;
        Ok(self.phi_psi_unchecked(t, u))
    }

    /// Both transforms without the domain check. Callers must have validated `u`.
    pub fn phi_psi_unchecked(&self, t: f64, u: Complex64) -> (Complex64, Complex64) {
        if t == 0.0 {
            return (Complex64::new(0.0, 0.0), u);
        }
        match *self {
            AffineComponent::Cir(c) => cir_phi_psi(c.lambda, c.theta, c.eta, t, u),
            AffineComponent::CirJump(c) => {
                let (phi_d, psi) = cir_phi_psi(c.lambda, c.theta, c.eta, t, u);
                if c.beta == 0.0 {
                    return (phi_d, psi);
                }
                let one_minus_e = -(-c.lambda * t).exp_m1();
                let e = 1.0 - one_minus_e;
                let ca = 2.0 * c.eta * c.eta * c.alpha / c.lambda;
                let eps = 1.0 - ca;
                let base = c.alpha - u;
                // phi_jump = beta / eps * [ln(g_t) - ln(alpha - u)],
                // g_t = alpha - u (e + (1 - e) ca) = (alpha - u) + u eps (1 - e)
                let jump = if eps.abs() < RESONANCE_EPS {
                    let y = u * one_minus_e / base;
                    c.beta * y * (1.0 - eps * y / 2.0 + eps * eps * y * y / 3.0)
                } else {
                    let g = c.alpha - u * (e + one_minus_e * ca);
                    debug_assert!(g.re > 0.0 && base.re > 0.0);
                    c.beta / eps * (g.ln() - base.ln())
                };
                (phi_d + jump, psi)
            }
            AffineComponent::OuJump(c) => {
                let one_minus_e = -(-c.lambda * t).exp_m1();
                let e = 1.0 - one_minus_e;
                let one_minus_e2 = -(-2.0 * c.lambda * t).exp_m1();
                let eu = e * u;
                let mut phi = c.sigma * c.sigma * u * u * one_minus_e2 / (4.0 * c.lambda)
                    + c.theta * u * one_minus_e;
                if c.beta_plus != 0.0 {
                    phi += c.beta_plus * ((c.alpha_plus - eu).ln() - (c.alpha_plus - u).ln());
                }
                if c.beta_minus != 0.0 {
                    phi += c.beta_minus * ((c.alpha_minus + eu).ln() - (c.alpha_minus + u).ln());
                }
                (phi, eu)
            }
        }
    }

    /// Real cumulant `phi_t(u) + psi_t(u) x` of `X_t` started at `x`, for real `u`.
    pub fn log_mgf(&self, t: f64, u: f64, x: f64) -> Result<f64> {
        let (phi, psi) = self.phi_psi(0, t, Complex64::new(u, 0.0))?;
        Ok(phi.re + psi.re * x)
    }

    /// `E[X_t]` from the closed form `d/du (phi + psi x0)` at zero.
    pub fn mean(&self, t: f64) -> f64 {
        let e = (-self.lambda() * t).exp();
        let x0 = self.x0();
        match *self {
            AffineComponent::Cir(c) => c.theta * (1.0 - e) + x0 * e,
            AffineComponent::CirJump(c) => {
                // stationary level shifts by beta/alpha
                (c.theta + c.beta / c.alpha) * (1.0 - e) + x0 * e
            }
            AffineComponent::OuJump(c) => {
                (c.theta + c.beta_plus / c.alpha_plus - c.beta_minus / c.alpha_minus) * (1.0 - e)
                    + x0 * e
            }
        }
    }

    /// `Var[X_t]` from the second derivative of `phi_t(u) + psi_t(u) x0` at zero,
    /// by Richardson-extrapolated central differences.
    pub fn variance(&self, t: f64) -> f64 {
        self.variance_from(t, self.x0())
    }

    /// As [`variance`](Self::variance) but for an explicit starting state.
    pub fn variance_from(&self, t: f64, x0: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let iv = self.admissible(t);
        let scale = iv.upper.min(-iv.lower).min(1.0);
        let h = 1e-3 * scale;
        let f = |u: f64| {
            let (phi, psi) = self.phi_psi_unchecked(t, Complex64::new(u, 0.0));
            phi.re + psi.re * x0
        };
        let f0 = f(0.0);
        let d2 = |h: f64| (f(h) - 2.0 * f0 + f(-h)) / (h * h);
        let coarse = d2(2.0 * h);
        let fine = d2(h);
        (4.0 * fine - coarse) / 3.0
    }
}
