use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{AffineComponent, ProductProcess};
use crate::error::{Error, Result};
use crate::model::StateVector;

/// Paths per independently seeded block.
pub const BLOCK: usize = 4096;

/// Transition scheme for the square-root kinds. OU parts are always sampled exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CirScheme {
    /// Noncentral chi-square transitions between jump times.
    #[default]
    Exact,
    /// Full-truncation Euler on a `steps_per_year` grid.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SimulationPlan {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub cir_scheme: CirScheme,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        SimulationPlan {
            paths: 100_000,
            steps_per_year: 64,
            seed: 20110929,
            cir_scheme: CirScheme::Exact,
        }
    }
}

impl SimulationPlan {
    pub fn new(paths: usize, seed: u64) -> Self {
        SimulationPlan {
            paths,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::InvalidParameter("a simulation needs at least two paths".into()));
        }
        if self.steps_per_year == 0 {
            return Err(Error::InvalidParameter("steps_per_year must be positive".into()));
        }
        Ok(())
    }

    fn blocks(&self) -> usize {
        self.paths.div_ceil(BLOCK)
    }

    fn block_rng(&self, block: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block as u64);
        rng
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub paths: usize,
}

impl Estimate {
    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr.max(f64::MIN_POSITIVE)
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let n: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    n as u64
}

/// Exact square-root transition `dX = lambda (theta - X) dt + 2 eta sqrt(X) dW` over `h`.
fn cir_exact<R: Rng + ?Sized>(lambda: f64, theta: f64, eta: f64, x: f64, h: f64, rng: &mut R) -> f64 {
    let e = (-lambda * h).exp();
    if eta == 0.0 {
        return theta + (x - theta) * e;
    }
    let c = eta * eta * (-(-lambda * h).exp_m1()) / lambda;
    let half_dof = lambda * theta / (2.0 * eta * eta);
    let n = poisson(x.max(0.0) * e / (2.0 * c), rng);
    let shape = half_dof + n as f64;
    if shape <= 0.0 {
        return 0.0;
    }
    let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
    2.0 * c * g
}

fn ou_exact<R: Rng + ?Sized>(lambda: f64, theta: f64, sigma: f64, x: f64, h: f64, rng: &mut R) -> f64 {
    let e = (-lambda * h).exp();
    let mean = theta + (x - theta) * e;
    if sigma == 0.0 {
        return mean;
    }
    let sd = sigma * ((-(-2.0 * lambda * h).exp_m1()) / (2.0 * lambda)).sqrt();
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

fn exponential<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / alpha
}

/// Sorted arrival times of a Poisson process with `rate` on `[0, h]`.
fn arrivals<R: Rng + ?Sized>(rate: f64, h: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let n = poisson(rate * h, rng);
    out.extend((0..n).map(|_| h * rng.random::<f64>()));
    out.sort_by(f64::total_cmp);
}

/// Per-thread scratch for jump times.
#[derive(Default)]
pub(crate) struct Scratch {
    times: Vec<f64>,
    marks: Vec<(f64, f64)>,
    clamps: usize,
}

/// Advances one component by `h` under `plan`.
pub(crate) fn advance<R: Rng + ?Sized>(
    comp: &AffineComponent,
    x: f64,
    h: f64,
    plan: &SimulationPlan,
    rng: &mut R,
    scratch: &mut Scratch,
) -> f64 {
    if h <= 0.0 {
        return x;
    }
    match *comp {
        AffineComponent::Cir(c) => match plan.cir_scheme {
            CirScheme::Exact => cir_exact(c.lambda, c.theta, c.eta, x, h, rng),
            CirScheme::Euler => cir_euler(c.lambda, c.theta, c.eta, 0.0, 1.0, x, h, plan, rng, scratch),
        },
        AffineComponent::CirJump(c) => match plan.cir_scheme {
            CirScheme::Exact => {
                arrivals(c.lambda * c.beta, h, rng, &mut scratch.times);
                let mut t = 0.0;
                let mut y = x;
                for i in 0..scratch.times.len() {
                    let s = scratch.times[i];
                    y = cir_exact(c.lambda, c.theta, c.eta, y, s - t, rng) + exponential(c.alpha, rng);
                    t = s;
                }
                cir_exact(c.lambda, c.theta, c.eta, y, h - t, rng)
            }
            CirScheme::Euler => cir_euler(c.lambda, c.theta, c.eta, c.beta, c.alpha, x, h, plan, rng, scratch),
        },
        AffineComponent::OuJump(c) => {
            scratch.marks.clear();
            for (beta, alpha, sign) in [(c.beta_plus, c.alpha_plus, 1.0), (c.beta_minus, c.alpha_minus, -1.0)] {
                arrivals(c.lambda * beta, h, rng, &mut scratch.times);
                for i in 0..scratch.times.len() {
                    let s = scratch.times[i];
                    scratch.marks.push((s, sign * exponential(alpha, rng)));
                }
            }
            scratch.marks.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut t = 0.0;
            let mut y = x;
            for i in 0..scratch.marks.len() {
                let (s, jump) = scratch.marks[i];
                y = ou_exact(c.lambda, c.theta, c.sigma, y, s - t, rng) + jump;
                t = s;
            }
            ou_exact(c.lambda, c.theta, c.sigma, y, h - t, rng)
        }
    }
}

/// Full-truncation Euler; jumps of a step are added at its end.
#[allow(clippy::too_many_arguments)]
fn cir_euler<R: Rng + ?Sized>(
    lambda: f64,
    theta: f64,
    eta: f64,
    beta: f64,
    alpha: f64,
    x: f64,
    h: f64,
    plan: &SimulationPlan,
    rng: &mut R,
    scratch: &mut Scratch,
) -> f64 {
    let steps = ((h * plan.steps_per_year as f64).ceil() as usize).max(1);
    let dt = h / steps as f64;
    let sq = dt.sqrt();
    let mut y = x;
    for _ in 0..steps {
        let yp = y.max(0.0);
        if y < 0.0 {
            scratch.clamps += 1;
        }
        let z: f64 = StandardNormal.sample(rng);
        y += lambda * (theta - yp) * dt + 2.0 * eta * yp.sqrt() * sq * z;
        if beta > 0.0 {
            for _ in 0..poisson(lambda * beta * dt, rng) {
                y += exponential(alpha, rng);
            }
        }
    }
    y.max(0.0)
}

/// One path of `process` observed at increasing `times`, written into `out` (time-major).
pub(crate) fn simulate_path<R: Rng + ?Sized>(
    components: &[AffineComponent],
    start: &[f64],
    times: &[f64],
    plan: &SimulationPlan,
    rng: &mut R,
    scratch: &mut Scratch,
    out: &mut [f64],
) {
    let d = components.len();
    for (i, comp) in components.iter().enumerate() {
        let mut x = start[i];
        let mut t = 0.0;
        for (ti, &s) in times.iter().enumerate() {
            x = advance(comp, x, s - t, plan, rng, scratch);
            t = s;
            out[ti * d + i] = x;
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "observation times must be nonnegative and increasing, got {times:?}"
        )));
    }
    Ok(())
}

/// Simulated states of every path at the observation times.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub times: Vec<f64>,
    pub dim: usize,
    pub paths: usize,
    /// path-major, then time, then component
    pub data: Vec<f64>,
}

impl Ensemble {
    pub fn x(&self, path: usize, time: usize) -> &[f64] {
        let off = (path * self.times.len() + time) * self.dim;
        &self.data[off..off + self.dim]
    }

    pub fn state(&self, path: usize, time: usize) -> StateVector {
        StateVector::new(self.times[time], self.x(path, time).to_vec())
    }

    /// Index of observation time `t`.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() < 1e-12)
    }
}

/// Simulates `plan.paths` paths of `process` from its initial state, kept in memory.
pub fn simulate(process: &ProductProcess, plan: &SimulationPlan, times: &[f64]) -> Result<Ensemble> {
    plan.validate()?;
    check_times(times)?;
    let d = process.dim();
    let per_path = d * times.len();
    let start = process.x0();
    let blocks: Vec<Vec<f64>> = (0..plan.blocks())
        .into_par_iter()
        .map(|b| {
            let mut rng = plan.block_rng(b);
            let mut scratch = Scratch::default();
            let n = BLOCK.min(plan.paths - b * BLOCK);
            let mut data = vec![0.0; n * per_path];
            for p in 0..n {
                simulate_path(
                    process.components(),
                    &start,
                    times,
                    plan,
                    &mut rng,
                    &mut scratch,
                    &mut data[p * per_path..(p + 1) * per_path],
                );
            }
            if scratch.clamps > 0 {
                log::debug!("block {b}: {} Euler steps clamped at zero", scratch.clamps);
            }
            data
        })
        .collect();
    Ok(Ensemble {
        times: times.to_vec(),
        dim: d,
        paths: plan.paths,
        data: blocks.concat(),
    })
}

/// Sample means of `outputs` path functionals without storing paths.
///
/// `f` receives the observed states (time-major, `times.len() * dim`) and fills one value per output.
pub fn mc_expectations<F>(
    process: &ProductProcess,
    plan: &SimulationPlan,
    times: &[f64],
    outputs: usize,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    expectations(process.components(), plan, times, outputs, f)
}

fn expectations<F>(
    components: &[AffineComponent],
    plan: &SimulationPlan,
    times: &[f64],
    outputs: usize,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    plan.validate()?;
    check_times(times)?;
    let d = components.len();
    let start: Vec<f64> = components.iter().map(|c| c.x0()).collect();
    let sums: Vec<(Vec<f64>, Vec<f64>)> = (0..plan.blocks())
        .into_par_iter()
        .map(|b| {
            let mut rng = plan.block_rng(b);
            let mut scratch = Scratch::default();
            let mut states = vec![0.0; d * times.len()];
            let mut vals = vec![0.0; outputs];
            let mut s1 = vec![0.0; outputs];
            let mut s2 = vec![0.0; outputs];
            for _ in 0..BLOCK.min(plan.paths - b * BLOCK) {
                simulate_path(components, &start, times, plan, &mut rng, &mut scratch, &mut states);
                f(&states, &mut vals);
                for ((a, q), v) in s1.iter_mut().zip(s2.iter_mut()).zip(&vals) {
                    *a += v;
                    *q += v * v;
                }
            }
            (s1, s2)
        })
        .collect();
    let n = plan.paths as f64;
    let mut s1 = vec![0.0; outputs];
    let mut s2 = vec![0.0; outputs];
    for (a, q) in &sums {
        for o in 0..outputs {
            s1[o] += a[o];
            s2[o] += q[o];
        }
    }
    Ok(s1
        .iter()
        .zip(&s2)
        .map(|(a, q)| {
            let mean = a / n;
            let var = ((q / n - mean * mean) * n / (n - 1.0)).max(0.0);
            Estimate {
                mean,
                stderr: (var / n).sqrt(),
                paths: plan.paths,
            }
        })
        .collect())
}

/// Monte Carlo `E[exp(u X_t)]` for one component started at its `x0`.
pub fn mc_component_mgf(comp: &AffineComponent, t: f64, us: &[f64], plan: &SimulationPlan) -> Result<Vec<Estimate>> {
    comp.validate()?;
    expectations(std::slice::from_ref(comp), plan, &[t], us.len(), |x, out| {
        for (o, u) in out.iter_mut().zip(us) {
            *o = (u * x[0]).exp();
        }
    })
}
