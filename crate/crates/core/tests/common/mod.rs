#![allow(dead_code)]

use affine_inflation::calibrator::CalibrationSettings;
use affine_inflation::synthetic::reference_config;
use affine_inflation::{AffineComponent, Cir, CirJump, ModelConfig, OuJump, StateVector};
use rand::Rng;

/// `(F(u), R(u))` of the generalized Riccati equations, written from the SDE of each driver.
pub fn riccati_rhs(c: &AffineComponent, u: f64) -> (f64, f64) {
    match *c {
        AffineComponent::Cir(p) => (p.lambda * p.theta * u, 2.0 * p.eta * p.eta * u * u - p.lambda * u),
        AffineComponent::CirJump(p) => (
            p.lambda * p.theta * u + p.lambda * p.beta * u / (p.alpha - u),
            2.0 * p.eta * p.eta * u * u - p.lambda * u,
        ),
        AffineComponent::OuJump(p) => (
            p.lambda * p.theta * u
                + 0.5 * p.sigma * p.sigma * u * u
                + p.lambda * p.beta_plus * u / (p.alpha_plus - u)
                - p.lambda * p.beta_minus * u / (p.alpha_minus + u),
            -p.lambda * u,
        ),
    }
}

/// `(phi_t(u), psi_t(u))` by classical RK4 on `phi' = F(psi)`, `psi' = R(psi)`.
pub fn riccati(c: &AffineComponent, t: f64, u: f64, steps: usize) -> (f64, f64) {
    let h = t / steps as f64;
    let (mut phi, mut psi) = (0.0, u);
    for _ in 0..steps {
        let (f1, r1) = riccati_rhs(c, psi);
        let (f2, r2) = riccati_rhs(c, psi + 0.5 * h * r1);
        let (f3, r3) = riccati_rhs(c, psi + 0.5 * h * r2);
        let (f4, r4) = riccati_rhs(c, psi + h * r3);
        phi += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
        psi += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    }
    (phi, psi)
}

pub fn common_cir() -> AffineComponent {
    AffineComponent::Cir(Cir {
        lambda: 0.026,
        theta: 0.65,
        eta: 0.5,
        x0: 3.45,
    })
}

pub fn sample_cir_jump() -> AffineComponent {
    AffineComponent::CirJump(CirJump {
        lambda: 0.55,
        theta: 1.0,
        eta: 0.37,
        x0: 1.0,
        alpha: 8.0,
        beta: 0.3,
    })
}

pub fn sample_ou_jump() -> AffineComponent {
    AffineComponent::OuJump(OuJump {
        lambda: 0.1,
        theta: 1.0,
        sigma: 0.15,
        x0: 1.0,
        alpha_plus: 25.0,
        beta_plus: 0.4,
        alpha_minus: 20.0,
        beta_minus: 0.6,
    })
}

pub fn kinds() -> [AffineComponent; 3] {
    [common_cir(), sample_cir_jump(), sample_ou_jump()]
}

pub fn reference(years: usize) -> ModelConfig {
    reference_config(years, &CalibrationSettings::default()).unwrap()
}

/// A random state at time `t`: nonnegative drivers in `(0, 2 x0]`, real drivers around `x0`.
pub fn random_state<R: Rng>(cfg: &ModelConfig, t: f64, rng: &mut R) -> StateVector {
    let x = cfg
        .process()
        .components()
        .iter()
        .map(|c| {
            if c.is_nonnegative() {
                c.x0() * (0.05 + 1.95 * rng.random::<f64>())
            } else {
                c.x0() + (rng.random::<f64>() - 0.5) * 2.0
            }
        })
        .collect();
    StateVector::new(t, x)
}

/// Roots of `g` on `[lo, hi]` from sign changes on a uniform grid, refined by bisection.
pub fn grid_roots(g: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let h = (hi - lo) / (points - 1) as f64;
    let mut roots = Vec::new();
    let mut prev = (lo, g(lo));
    for i in 1..points {
        let x = lo + h * i as f64;
        let gx = g(x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != gx.signum() && gx != 0.0 {
            let (mut a, mut b, mut ga) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (x, gx);
    }
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    roots
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
