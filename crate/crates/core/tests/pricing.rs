mod common;

use affine_inflation::model::LogMgf;
use affine_inflation::pricer::{
    black, implied_vol, price_options, shifted_black, strike_grid, ContourSpec, OptionKind, OptionQuote, INFLATION_SHIFT,
};
use affine_inflation::ModelConfig;
use common::reference;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn cfg() -> &'static ModelConfig {
    static CFG: OnceLock<ModelConfig> = OnceLock::new();
    CFG.get_or_init(|| reference(5))
}

/// `E[(e^Y - K)_+]` on the contour `Re z = 1/2`, adding back the residue at `z = 1`.
///
/// Integrated in `x = u / (1 + u)` with composite Simpson.
fn residue_call(mgf: impl Fn(Complex64) -> Complex64, strike: f64, points: usize) -> f64 {
    let forward = mgf(Complex64::new(1.0, 0.0)).re;
    let ln_k = strike.ln();
    let g = |x: f64| -> f64 {
        if x >= 1.0 {
            return 0.0;
        }
        let u = x / (1.0 - x);
        let z = Complex64::new(0.5, u);
        let v = mgf(z) * (-z * ln_k).exp() / (z * (z - 1.0));
        v.re / ((1.0 - x) * (1.0 - x))
    };
    let n = points + points % 2;
    let h = 1.0 / n as f64;
    let mut acc = g(0.0) + g(1.0);
    for i in 1..n {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    forward + strike / std::f64::consts::PI * acc * h / 3.0
}

fn family_mgf(cfg: &ModelConfig, kind: OptionKind, k: usize, j: usize) -> (LogMgf, f64, f64) {
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    match kind {
        OptionKind::CpiCall => (cfg.log_cpi_mgf(k, &s0).unwrap(), 1.0, 0.0),
        OptionKind::InflCaplet => {
            let a = tenor.date(k) - tenor.date(k - j);
            (cfg.yoy_mgf(k, j, &s0).unwrap(), a, 1.0)
        }
        OptionKind::IrCaplet => (cfg.forward_rate_mgf(k, &s0).unwrap(), tenor.delta, 1.0),
        _ => unreachable!(),
    }
}

#[test]
fn calls_match_residue_contour_oracle() {
    let cfg = cfg();
    let cases = [
        (OptionKind::CpiCall, 4, 0),
        (OptionKind::CpiCall, 10, 0),
        (OptionKind::InflCaplet, 6, 2),
        (OptionKind::InflCaplet, 10, 1),
        (OptionKind::IrCaplet, 3, 0),
        (OptionKind::IrCaplet, 10, 0),
    ];
    for (kind, k, j) in cases {
        let strikes = strike_grid(cfg, kind, k, j, &[-1.0, 0.0, 1.0]).unwrap();
        let prices = price_options(cfg, kind, k, j, &strikes, &ContourSpec::default()).unwrap();
        let (mgf, scale, shift) = family_mgf(cfg, kind, k, j);
        let d = cfg.discount(k).unwrap();
        for (s, p) in strikes.iter().zip(&prices) {
            let oracle = d * residue_call(|z| mgf.eval(z).unwrap(), shift + scale * s, 400_000);
            assert!((p.price - oracle).abs() < 1e-9, "{kind:?} k={k} K={s}: {} vs {oracle}", p.price);
        }
    }
}

#[test]
fn parity_against_model_forwards() {
    let cfg = cfg();
    let s0 = cfg.initial_state();
    let spec = ContourSpec::default();
    let tenor = cfg.tenor();
    for k in [2, 5, 10] {
        let d = cfg.discount(k).unwrap();
        let fams = [
            (OptionKind::CpiCall, OptionKind::CpiPut, 0, 1.0, cfg.forward_cpi(k, &s0).unwrap()),
            (
                OptionKind::InflCaplet,
                OptionKind::InflFloorlet,
                2,
                tenor.date(k) - tenor.date(k - 2),
                cfg.forward_inflation(k, 2, &s0).unwrap(),
            ),
            (OptionKind::IrCaplet, OptionKind::IrFloorlet, 0, tenor.delta, cfg.forward_rate(k, &s0).unwrap()),
        ];
        for (call, put, j, accrual, fwd) in fams {
            let strikes = strike_grid(cfg, call, k, j, &[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
            let c = price_options(cfg, call, k, j, &strikes, &spec).unwrap();
            let p = price_options(cfg, put, k, j, &strikes, &spec).unwrap();
            for ((s, c), p) in strikes.iter().zip(&c).zip(&p) {
                let parity = d * accrual * (fwd - s);
                assert!((c.price - p.price - parity).abs() < 1e-10, "{call:?} k={k} K={s}");
            }
        }
    }
}

#[test]
fn implied_vols_reprice() {
    let cfg = cfg();
    let s0 = cfg.initial_state();
    let tenor = cfg.tenor();
    let spec = ContourSpec::default();
    let k = 8;
    let d = cfg.discount(k).unwrap();
    for m in [-1.0, 0.0, 1.0] {
        let s = strike_grid(cfg, OptionKind::IrCaplet, k, 0, &[m]).unwrap()[0];
        let p = price_options(cfg, OptionKind::IrCaplet, k, 0, &[s], &spec).unwrap()[0].price;
        let q = OptionQuote { kind: OptionKind::IrCaplet, k, j: 0, strike: s, price: p };
        let vol = implied_vol(cfg, &q).unwrap();
        let f = cfg.forward_rate(k, &s0).unwrap();
        let back = tenor.delta * black(f, s, tenor.date(k - 1), vol, d, true);
        assert!((back - p).abs() < 1e-12);

        let s = strike_grid(cfg, OptionKind::InflCaplet, k, 2, &[m]).unwrap()[0];
        let p = price_options(cfg, OptionKind::InflCaplet, k, 2, &[s], &spec).unwrap()[0].price;
        let q = OptionQuote { kind: OptionKind::InflCaplet, k, j: 2, strike: s, price: p };
        let vol = implied_vol(cfg, &q).unwrap();
        let a = tenor.date(k) - tenor.date(k - 2);
        let f = cfg.forward_inflation_approx(k, 2, &s0).unwrap();
        let back = a * shifted_black(f, s, tenor.date(k), vol, d, INFLATION_SHIFT, true);
        assert!((back - p).abs() < 1e-12);
    }
}

#[test]
fn deterministic_first_caplet() {
    let cfg = cfg();
    let f = cfg.forward_rate(1, &cfg.initial_state()).unwrap();
    let d = cfg.discount(1).unwrap();
    let delta = cfg.tenor().delta;
    let p = price_options(cfg, OptionKind::IrCaplet, 1, 0, &[f - 0.01, f + 0.01], &ContourSpec::default()).unwrap();
    assert!((p[0].price - d * delta * 0.01).abs() < 1e-15);
    assert_eq!(p[1].price, 0.0);
}

#[test]
fn nonpositive_payoff_strike_is_rejected() {
    let cfg = cfg();
    let spec = ContourSpec::default();
    assert!(price_options(cfg, OptionKind::CpiCall, 4, 0, &[0.0], &spec).is_err());
    assert!(price_options(cfg, OptionKind::InflCaplet, 4, 2, &[-1.0], &spec).is_err());
    assert!(price_options(cfg, OptionKind::IrCaplet, 4, 0, &[-2.5], &spec).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn call_prices_are_bounded_decreasing_and_convex(
        family in 0usize..3,
        k in 2usize..=10,
        lo in -2.5..0.0f64,
        width in 0.5..3.0f64,
    ) {
        let cfg = cfg();
        let (kind, j) = [(OptionKind::CpiCall, 0), (OptionKind::InflCaplet, 2), (OptionKind::IrCaplet, 0)][family];
        let m: Vec<f64> = (0..9).map(|i| lo + width * i as f64 / 8.0).collect();
        let mut strikes = strike_grid(cfg, kind, k, j, &m).unwrap();
        // uniform in strike for the butterfly
        let (a, b) = (strikes[0], strikes[8]);
        for (i, s) in strikes.iter_mut().enumerate() {
            *s = a + (b - a) * i as f64 / 8.0;
        }
        let p: Vec<f64> = price_options(cfg, kind, k, j, &strikes, &ContourSpec::default())
            .unwrap()
            .iter()
            .map(|p| p.price)
            .collect();
        for w in p.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for w in p.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
        }
        prop_assert!(p.iter().all(|x| *x >= -1e-12));
    }

    #[test]
    fn damping_choice_does_not_move_prices(family in 0usize..3, k in 2usize..=10, m in -1.5..1.5f64, f in 0.2..0.8f64) {
        let cfg = cfg();
        let (kind, j) = [(OptionKind::CpiCall, 0), (OptionKind::InflCaplet, 2), (OptionKind::IrCaplet, 0)][family];
        let s = strike_grid(cfg, kind, k, j, &[m]).unwrap();
        let base = price_options(cfg, kind, k, j, &s, &ContourSpec::default()).unwrap()[0];
        let r = 1.0 + f * (base.damping - 1.0) * 1.5;
        let spec = ContourSpec { damping: Some(r.min(base.damping * 1.2)), ..ContourSpec::default() };
        let moved = price_options(cfg, kind, k, j, &s, &spec).unwrap()[0];
        prop_assert!((moved.price - base.price).abs() < 1e-9, "{} {} R {} -> {}", base.price, moved.price, base.damping, moved.damping);
    }
}
