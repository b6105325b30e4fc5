//! Invariant checks of a model configuration with a Monte Carlo cross-check, reported as a
//! pass/fail table.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::affine::{AffineComponent, Interval};
use crate::calibrator::check_lemma;
use crate::error::Result;
use crate::market_data::{num, Table};
use crate::mc::{mc_component_mgf, mc_price_batch, SimulationPlan};
use crate::model::{ModelConfig, QuantitySelector, StateVector};
use crate::pricer::{price_options, strike_grid, ContourSpec, OptionKind, OptionQuote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not decidable with the given inputs, e.g. too few Monte Carlo paths.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Worst observed value of the checked metric.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn bound(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: if metric.is_finite() && metric <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            metric,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Fail,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: detail.into(),
        }
    }

    fn inconclusive(name: &str, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Inconclusive,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ValidationOptions {
    pub plan: SimulationPlan,
    pub contour: ContourSpec,
    /// Below this path count Monte Carlo checks are inconclusive.
    pub min_paths: usize,
    pub sigmas: f64,
    /// Widen `sigmas` so the whole family of Monte Carlo comparisons keeps the false-alarm
    /// rate of a single `sigmas` test (Bonferroni).
    pub family_wise: bool,
    pub random_cases: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            plan: SimulationPlan::default(),
            contour: ContourSpec::default(),
            min_paths: 10_000,
            sigmas: 3.0,
            family_wise: true,
            random_cases: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    /// True when no check failed; inconclusive checks do not count as failures.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "status", "metric", "tolerance", "detail"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone(),
                format!("{:?}", c.status).to_uppercase(),
                num(c.metric),
                num(c.tolerance),
                c.detail.clone(),
            ]);
        }
        t
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::failed(name, e.to_string()))
}

/// A real test point strictly inside `iv`, kept within `[-cap, cap]`.
fn sample_in<R: Rng>(iv: Interval, cap: f64, rng: &mut R) -> f64 {
    let lo = iv.lower.max(-cap) * 0.9;
    let hi = iv.upper.min(cap) * 0.9;
    lo + (hi - lo) * rng.random::<f64>()
}

fn semiflow(cfg: &ModelConfig, cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let horizon = cfg.horizon();
    let mut worst: f64 = 0.0;
    for c in cfg.process().components() {
        for _ in 0..cases {
            let t = horizon * 0.5 * rng.random::<f64>();
            let s = horizon * 0.5 * rng.random::<f64>();
            let u = Complex64::new(sample_in(c.admissible(t + s), 5.0, rng), 4.0 * (rng.random::<f64>() - 0.5));
            let (phi_ts, psi_ts) = c.phi_psi(0, t + s, u)?;
            let (phi_t, psi_t) = c.phi_psi(0, t, u)?;
            let (phi_s, psi_s) = c.phi_psi(0, s, psi_t)?;
            let scale = 1.0 + phi_ts.norm().max(psi_ts.norm());
            worst = worst.max((phi_ts - phi_t - phi_s).norm() / scale);
            worst = worst.max((psi_ts - psi_s).norm() / scale);
        }
    }
    Ok(CheckResult::bound(
        "semiflow",
        worst,
        1e-10,
        format!("{} components x {cases} random (u, s, t)", cfg.dim()),
    ))
}

/// Classical RK4 on the CIR Riccati system `phi' = lambda theta psi`, `psi' = 2 eta^2 psi^2 - lambda psi`.
fn riccati(lambda: f64, theta: f64, eta: f64, t: f64, u: f64) -> (f64, f64) {
    let steps = 4000;
    let h = t / steps as f64;
    let f = |psi: f64| (lambda * theta * psi, 2.0 * eta * eta * psi * psi - lambda * psi);
    let (mut phi, mut psi) = (0.0, u);
    for _ in 0..steps {
        let k1 = f(psi);
        let k2 = f(psi + 0.5 * h * k1.1);
        let k3 = f(psi + 0.5 * h * k2.1);
        let k4 = f(psi + h * k3.1);
        phi += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        psi += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (phi, psi)
}

fn cir_ode(cfg: &ModelConfig) -> Result<CheckResult> {
    let c = match cfg.process().component(0) {
        AffineComponent::Cir(c) => *c,
        other => return Ok(CheckResult::inconclusive("cir_riccati", format!("component 0 is {}", other.kind_name()))),
    };
    let comp = AffineComponent::Cir(c);
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        let t = cfg.horizon() * i as f64 / 10.0;
        let iv = comp.admissible(t);
        for j in 0..10 {
            let u = -2.0 + (iv.upper.min(2.0) * 0.9 + 2.0) * j as f64 / 9.0;
            let (phi, psi) = comp.phi_psi(0, t, Complex64::new(u, 0.0))?;
            let (phi_o, psi_o) = riccati(c.lambda, c.theta, c.eta, t, u);
            worst = worst.max((phi.re - phi_o).abs() / phi_o.abs().max(1e-12));
            worst = worst.max((psi.re - psi_o).abs() / psi_o.abs().max(1e-12));
        }
    }
    Ok(CheckResult::bound("cir_riccati", worst, 1e-8, "closed form vs RK4 on a 10 x 10 (t, u) grid"))
}

fn random_state<R: Rng>(cfg: &ModelConfig, t: f64, rng: &mut R) -> StateVector {
    let x = cfg
        .process()
        .components()
        .iter()
        .map(|c| {
            let x0 = c.x0();
            if c.is_nonnegative() {
                (2.0 * x0 + 1.0) * rng.random::<f64>()
            } else {
                x0 + 2.0 * (rng.random::<f64>() - 0.5)
            }
        })
        .collect();
    StateVector::new(t, x)
}

fn martingale_identities(cfg: &ModelConfig, cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let tenor = cfg.tenor();
    let one = Complex64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let k = rng.random_range(2..=cfg.n());
        let j = 2;
        let s = tenor.date(k - j) * rng.random::<f64>();
        let state = random_state(cfg, s, rng);
        let cpi = cfg.forward_cpi(k, &state)?;
        let m = cfg.mgf_log_cpi(k, one, &state)?;
        worst = worst.max((m - cpi).norm() / cpi);
        let yoy = cfg.mgf_yoy(k, j, one, &state)?;
        let accrual = tenor.date(k) - tenor.date(k - j);
        let fwd = 1.0 + accrual * cfg.forward_inflation(k, j, &state)?;
        worst = worst.max((yoy - fwd).norm() / fwd);
    }
    Ok(CheckResult::bound(
        "martingale_identities",
        worst,
        1e-12,
        format!("CPI and year-on-year MGFs at z = 1 over {cases} random states"),
    ))
}

fn forwards(cfg: &ModelConfig) -> Result<CheckResult> {
    let s0 = cfg.initial_state();
    let mut worst = f64::INFINITY;
    let mut at = 0;
    for k in 1..=cfg.n() {
        let f = cfg.forward_rate(k, &s0)?;
        if f < worst {
            worst = f;
            at = k;
        }
    }
    let ordered = cfg.check_monotone();
    let mut r = CheckResult::bound(
        "nonnegative_forwards",
        -worst,
        0.0,
        format!("lowest forward {worst:e} at k = {at}"),
    );
    if let Err(e) = ordered {
        r.status = CheckStatus::Fail;
        r.detail = e.to_string();
    }
    Ok(r)
}

const FAMILIES: [(OptionKind, OptionKind, usize); 3] = [
    (OptionKind::CpiCall, OptionKind::CpiPut, 0),
    (OptionKind::InflCaplet, OptionKind::InflFloorlet, 2),
    (OptionKind::IrCaplet, OptionKind::IrFloorlet, 0),
];

const MONEYNESS: [f64; 5] = [-1.5, -0.75, 0.0, 0.75, 1.5];

fn sample_indices(cfg: &ModelConfig) -> Vec<usize> {
    let n = cfg.n();
    let mut ks = vec![2, n / 2 + n / 2 % 2, n];
    ks.dedup();
    ks
}

fn parity_and_shape(cfg: &ModelConfig, spec: &ContourSpec) -> Result<(CheckResult, CheckResult)> {
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    let (mut parity, mut shape): (f64, f64) = (0.0, 0.0);
    for (call, put, j) in FAMILIES {
        for k in sample_indices(cfg) {
            let strikes = strike_grid(cfg, call, k, j, &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])?;
            let c = price_options(cfg, call, k, j, &strikes, spec)?;
            let p = price_options(cfg, put, k, j, &strikes, spec)?;
            let d = cfg.discount(k)?;
            let (fwd, map): (f64, Box<dyn Fn(f64) -> f64>) = match call {
                OptionKind::CpiCall => (cfg.forward_cpi(k, &s0)?, Box::new(|x| x)),
                OptionKind::InflCaplet => {
                    let a = tenor.date(k) - tenor.date(k - j);
                    (1.0 + a * cfg.forward_inflation(k, j, &s0)?, Box::new(move |x| 1.0 + a * x))
                }
                _ => {
                    let dl = tenor.delta;
                    (1.0 + dl * cfg.forward_rate(k, &s0)?, Box::new(move |x| 1.0 + dl * x))
                }
            };
            for ((ci, pi), kk) in c.iter().zip(&p).zip(&strikes) {
                parity = parity.max((ci.price - pi.price - d * (fwd - map(*kk))).abs());
            }
            for w in c.windows(2) {
                shape = shape.max(w[1].price - w[0].price);
            }
            for w in c.windows(3).zip(strikes.windows(3)) {
                let (v, x) = w;
                let slope_l = (v[1].price - v[0].price) / (x[1] - x[0]);
                let slope_r = (v[2].price - v[1].price) / (x[2] - x[1]);
                shape = shape.max((slope_l - slope_r) * (x[2] - x[0]));
            }
        }
    }
    Ok((
        CheckResult::bound("put_call_parity", parity, 1e-9, "independent call and put contours"),
        CheckResult::bound("strike_monotone_convex", shape, 1e-9, "call prices decreasing and convex in strike"),
    ))
}

fn contour_robustness(cfg: &ModelConfig, spec: &ContourSpec) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (call, _, j) in FAMILIES {
        for k in sample_indices(cfg) {
            let strikes = strike_grid(cfg, call, k, j, &MONEYNESS)?;
            let base = price_options(cfg, call, k, j, &strikes, spec)?;
            let r = base[0].damping;
            let moved = ContourSpec {
                damping: Some(1.0 + 0.5 * (r - 1.0)),
                ..*spec
            };
            let doubled = ContourSpec {
                nodes: 2 * spec.nodes,
                ..*spec
            };
            for alt in [moved, doubled] {
                let p = price_options(cfg, call, k, j, &strikes, &alt)?;
                for (a, b) in base.iter().zip(&p) {
                    worst = worst.max((a.price - b.price).abs());
                }
            }
        }
    }
    Ok(CheckResult::bound(
        "contour_robustness",
        worst,
        1e-8,
        "damping moved towards 1 and node doubling",
    ))
}

fn correlations(cfg: &ModelConfig) -> Result<CheckResult> {
    let g = cfg.generators();
    let decreasing = g.u_tilde.windows(2).all(|w| w[1] < w[0]);
    let tilted = g.v_tilde.iter().zip(&g.u_tilde).all(|(v, u)| v >= u);
    if !decreasing {
        return Ok(CheckResult::inconclusive("correlation_signs", "u_tilde not strictly decreasing"));
    }
    let n = cfg.n();
    let t = cfg.tenor().date(1);
    let mut worst: f64 = 0.0;
    for a in 2..=n {
        for b in a..=n {
            let rho = cfg.correlation(QuantitySelector::ForwardRate { k: a }, QuantitySelector::ForwardRate { k: b }, t)?;
            worst = worst.max(-rho);
        }
        if tilted {
            for b in 1..=n {
                let rho = cfg.correlation(QuantitySelector::ForwardCpi { k: b }, QuantitySelector::ForwardRate { k: a }, t)?;
                worst = worst.max(-rho);
            }
        }
    }
    Ok(CheckResult::bound(
        "correlation_signs",
        worst,
        1e-12,
        if tilted {
            "forward-rate and CPI-rate correlations nonnegative"
        } else {
            "forward-rate correlations nonnegative"
        },
    ))
}

fn fi_approximation(cfg: &ModelConfig) -> Result<CheckResult> {
    let s0 = cfg.initial_state();
    let mut worst: f64 = 0.0;
    for y in 1..=cfg.years() {
        let f = cfg.forward_inflation(2 * y, 2, &s0)?;
        let a = cfg.forward_inflation_approx(2 * y, 2, &s0)?;
        worst = worst.max((f - a).abs() * 1e4);
    }
    Ok(CheckResult::bound(
        "forward_inflation_approximation",
        worst,
        50.0,
        "annual forward inflation vs CPI-ratio approximation, bp",
    ))
}

fn lemma(cfg: &ModelConfig) -> Result<CheckResult> {
    let n = cfg.n();
    let m = cfg.years();
    let mut bad = Vec::new();
    let mut count = 0;
    for k in [1, n / 2, n] {
        for i in [0, k.div_ceil(2), m + k.div_ceil(2)] {
            let c = check_lemma(cfg, k, i, 41)?;
            count += 1;
            if !c.convex || (c.nonnegative && !c.monotone) {
                bad.push(format!("k={k} i={i}"));
            }
        }
    }
    Ok(CheckResult::bound(
        "lemma_shape",
        bad.len() as f64,
        0.0,
        if bad.is_empty() {
            format!("{count} sampled curves monotone and convex")
        } else {
            bad.join("; ")
        },
    ))
}

/// Bound on the largest of `count` absolute z-scores.
fn z_bound(opts: &ValidationOptions, count: usize) -> f64 {
    if !opts.family_wise || count <= 1 {
        return opts.sigmas;
    }
    let normal = Normal::standard();
    let alpha = 2.0 * normal.sf(opts.sigmas);
    normal.inverse_cdf(1.0 - alpha / (2.0 * count as f64)).max(opts.sigmas)
}

fn mc_transform(cfg: &ModelConfig, opts: &ValidationOptions, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let t = cfg.horizon();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let m = cfg.years();
    let mut picks = vec![0, 1, m, m + 1, 2 * m];
    picks.dedup();
    for i in picks {
        let c = cfg.process().component(i);
        let iv = c.admissible(t);
        // keep e^{uX} square integrable so the standard error is meaningful
        let half = Interval {
            lower: iv.lower / 2.0,
            upper: iv.upper / 2.0,
        };
        let us: Vec<f64> = (0..3).map(|_| sample_in(half, 2.0, rng)).collect();
        let est = mc_component_mgf(c, t, &us, &opts.plan)?;
        for (u, e) in us.iter().zip(&est) {
            let exact = c.log_mgf(t, *u, c.x0())?.exp();
            worst = worst.max(e.z_score(exact).abs());
            checked += 1;
        }
    }
    Ok(CheckResult::bound(
        "mc_transform",
        worst,
        z_bound(opts, checked),
        format!("{checked} (component, u) pairs at the horizon, standard errors"),
    ))
}

fn mc_prices(cfg: &ModelConfig, opts: &ValidationOptions) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for k in sample_indices(cfg) {
        let mut quotes = Vec::new();
        let mut fourier = Vec::new();
        for (call, _, j) in FAMILIES {
            let strikes = strike_grid(cfg, call, k, j, &MONEYNESS)?;
            let prices = price_options(cfg, call, k, j, &strikes, &opts.contour)?;
            for (s, p) in strikes.iter().zip(&prices) {
                quotes.push(OptionQuote {
                    kind: call,
                    k,
                    j,
                    strike: *s,
                    price: p.price,
                });
                fourier.push(p.price);
            }
        }
        let cpi = OptionQuote {
            kind: OptionKind::CpiCall,
            k,
            j: 0,
            strike: 1e-12,
            price: 0.0,
        };
        quotes.push(cpi);
        fourier.push(cfg.discount(k)? * cfg.forward_cpi(k, &cfg.initial_state())?);
        let est = mc_price_batch(cfg, &quotes, &opts.plan)?;
        for (e, f) in est.iter().zip(&fourier) {
            worst = worst.max(e.z_score(*f).abs());
            checked += 1;
        }
    }
    Ok(CheckResult::bound(
        "mc_vs_fourier",
        worst,
        z_bound(opts, checked),
        format!("{checked} option prices incl. zero-strike CPI calls, standard errors"),
    ))
}

/// Runs every check on `cfg`.
pub fn validate_model(cfg: &ModelConfig, opts: &ValidationOptions) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.plan.seed);
    let cases = opts.random_cases;
    let mut checks = vec![
        run("semiflow", || semiflow(cfg, cases, &mut rng)),
        run("cir_riccati", || cir_ode(cfg)),
        run("martingale_identities", || martingale_identities(cfg, cases, &mut rng)),
        run("nonnegative_forwards", || forwards(cfg)),
    ];
    match parity_and_shape(cfg, &opts.contour) {
        Ok((a, b)) => checks.extend([a, b]),
        Err(e) => checks.push(CheckResult::failed("put_call_parity", e.to_string())),
    }
    checks.push(run("contour_robustness", || contour_robustness(cfg, &opts.contour)));
    checks.push(run("correlation_signs", || correlations(cfg)));
    checks.push(run("forward_inflation_approximation", || fi_approximation(cfg)));
    checks.push(run("lemma_shape", || lemma(cfg)));
    if opts.plan.paths < opts.min_paths {
        let why = format!("{} paths below the minimum {}", opts.plan.paths, opts.min_paths);
        checks.push(CheckResult::inconclusive("mc_transform", why.clone()));
        checks.push(CheckResult::inconclusive("mc_vs_fourier", why));
    } else {
        checks.push(run("mc_transform", || mc_transform(cfg, opts, &mut rng)));
        checks.push(run("mc_vs_fourier", || mc_prices(cfg, opts)));
    }
    ValidationReport { checks }
}
