use serde::{Deserialize, Serialize};

use super::roots::RootPolicy;
use super::simplex::SimplexSettings;
use crate::affine::{Cir, CirJump, OuJump};
use crate::pricer::ContourSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ObjectiveKind {
    ImpliedVolMse,
    PriceMse,
}

/// Box for one parameter; `lower == upper` fixes it.
pub type Range = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CirJumpBox {
    pub lambda: Range,
    pub theta: Range,
    pub eta: Range,
    pub alpha: Range,
    pub beta: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OuJumpBox {
    pub lambda: Range,
    pub theta: Range,
    pub sigma: Range,
    pub alpha_plus: Range,
    pub beta_plus: Range,
    pub alpha_minus: Range,
    pub beta_minus: Range,
}

impl CirJumpBox {
    pub fn ranges(&self) -> [Range; 5] {
        [self.lambda, self.theta, self.eta, self.alpha, self.beta]
    }
}

impl OuJumpBox {
    pub fn ranges(&self) -> [Range; 7] {
        [
            self.lambda,
            self.theta,
            self.sigma,
            self.alpha_plus,
            self.beta_plus,
            self.alpha_minus,
            self.beta_minus,
        ]
    }
}

pub(crate) fn cirjump_params(c: &CirJump) -> [f64; 5] {
    [c.lambda, c.theta, c.eta, c.alpha, c.beta]
}

pub(crate) fn cirjump_from(p: &[f64], x0: f64) -> CirJump {
    CirJump {
        lambda: p[0],
        theta: p[1],
        eta: p[2],
        alpha: p[3],
        beta: p[4],
        x0,
    }
}

pub(crate) fn oujump_params(c: &OuJump) -> [f64; 7] {
    [
        c.lambda,
        c.theta,
        c.sigma,
        c.alpha_plus,
        c.beta_plus,
        c.alpha_minus,
        c.beta_minus,
    ]
}

pub(crate) fn oujump_from(p: &[f64], x0: f64) -> OuJump {
    OuJump {
        lambda: p[0],
        theta: p[1],
        sigma: p[2],
        alpha_plus: p[3],
        beta_plus: p[4],
        alpha_minus: p[5],
        beta_minus: p[6],
        x0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CalibrationSettings {
    /// The common driver, held fixed.
    pub common: Cir,
    /// Starting point for every nominal year; its `x0` is the fixed normalization.
    pub nominal_initial: CirJump,
    pub nominal_box: CirJumpBox,
    /// Starting point for every inflation year; its `x0` is the fixed normalization.
    pub inflation_initial: OuJump,
    pub inflation_box: OuJumpBox,
    pub nominal_objective: ObjectiveKind,
    pub inflation_objective: ObjectiveKind,
    pub simplex: SimplexSettings,
    /// Deterministic optimizer starts per year.
    pub starts: usize,
    /// Restarts from the best point while the objective keeps improving.
    pub polish_rounds: usize,
    pub root_tolerance: f64,
    /// Fit `u_tilde` so the common factor explains half the log-variance; otherwise `u_tilde = 0`.
    pub half_variance: bool,
    /// Tilt `v_tilde_k = u_tilde_k (1 + c k)`.
    pub tilt_c: f64,
    pub two_root_policy: RootPolicy,
    pub contour: ContourSpec,
    /// Start each year from the previous year's fit rather than `*_initial`.
    pub warm_start: bool,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            common: Cir {
                lambda: 0.026,
                theta: 0.65,
                eta: 0.5,
                x0: 3.45,
            },
            nominal_initial: CirJump {
                lambda: 0.25,
                theta: 1.0,
                eta: 0.2,
                x0: 1.0,
                alpha: 6.0,
                beta: 0.3,
            },
            nominal_box: CirJumpBox {
                lambda: [0.02, 2.0],
                theta: [0.1, 3.0],
                eta: [0.01, 0.6],
                alpha: [1.0, 30.0],
                beta: [0.0, 3.0],
            },
            inflation_initial: OuJump {
                lambda: 0.1,
                theta: 1.0,
                sigma: 0.2,
                x0: 1.0,
                alpha_plus: 20.0,
                beta_plus: 0.3,
                alpha_minus: 20.0,
                beta_minus: 0.3,
            },
            inflation_box: OuJumpBox {
                lambda: [0.01, 2.0],
                theta: [1.0, 1.0],
                sigma: [0.0, 1.5],
                alpha_plus: [2.0, 80.0],
                beta_plus: [0.0, 3.0],
                alpha_minus: [2.0, 80.0],
                beta_minus: [0.0, 3.0],
            },
            nominal_objective: ObjectiveKind::ImpliedVolMse,
            inflation_objective: ObjectiveKind::PriceMse,
            simplex: SimplexSettings {
                max_evaluations: 2500,
                f_tolerance: 1e-22,
                x_tolerance: 1e-10,
                target: 1e-14,
                initial_step: 0.15,
            },
            starts: 3,
            polish_rounds: 10,
            root_tolerance: 1e-12,
            half_variance: true,
            tilt_c: 0.08,
            two_root_policy: RootPolicy::SmallestAbs,
            contour: ContourSpec::default(),
            warm_start: true,
        }
    }
}

impl CalibrationSettings {
    pub fn validate(&self) -> crate::Result<()> {
        let check = |name: &str, ranges: &[Range]| -> crate::Result<()> {
            for r in ranges {
                if !(r[0] <= r[1] && r[0].is_finite() && r[1].is_finite()) {
                    return Err(crate::Error::InvalidConfig(format!("{name} box {r:?} is empty")));
                }
            }
            Ok(())
        };
        check("nominal", &self.nominal_box.ranges())?;
        check("inflation", &self.inflation_box.ranges())?;
        let nb = self.nominal_box;
        if nb.lambda[0] <= 0.0 || nb.eta[0] <= 0.0 || nb.alpha[0] <= 0.0 || nb.beta[0] < 0.0 || nb.theta[0] < 0.0 {
            return Err(crate::Error::InvalidConfig(
                "nominal box must keep lambda, eta, alpha > 0 and theta, beta >= 0".into(),
            ));
        }
        let ib = self.inflation_box;
        if ib.lambda[0] <= 0.0
            || ib.sigma[0] < 0.0
            || ib.alpha_plus[0] <= 0.0
            || ib.alpha_minus[0] <= 0.0
            || ib.beta_plus[0] < 0.0
            || ib.beta_minus[0] < 0.0
        {
            return Err(crate::Error::InvalidConfig(
                "inflation box must keep lambda, alpha± > 0 and sigma, beta± >= 0".into(),
            ));
        }
        if self.starts == 0 {
            return Err(crate::Error::InvalidConfig("at least one optimizer start".into()));
        }
        Ok(())
    }
}
