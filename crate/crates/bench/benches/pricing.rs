use affine_inflation::calibrator::CalibrationSettings;
use affine_inflation::mc::{mc_price_batch, SimulationPlan};
use affine_inflation::pricer::{implied_vol, price_options, strike_grid, ContourSpec, OptionKind, OptionQuote};
use affine_inflation::synthetic::reference_config;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn strips(c: &mut Criterion) {
    let cfg = reference_config(10, &CalibrationSettings::default()).unwrap();
    let spec = ContourSpec::default();
    let moneyness: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
    let mut group = c.benchmark_group("price_21_strikes");
    for (kind, j) in [(OptionKind::CpiCall, 0), (OptionKind::InflCaplet, 2), (OptionKind::IrCaplet, 0)] {
        for k in [4, 20] {
            let strikes = strike_grid(&cfg, kind, k, j, &moneyness).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{kind:?}"), k), &strikes, |b, s| {
                b.iter(|| price_options(&cfg, kind, k, j, black_box(s), &spec).unwrap())
            });
        }
    }
    group.finish();
}

fn vols(c: &mut Criterion) {
    let cfg = reference_config(10, &CalibrationSettings::default()).unwrap();
    let k = 12;
    let strike = strike_grid(&cfg, OptionKind::InflCaplet, k, 2, &[0.5]).unwrap()[0];
    let price = price_options(&cfg, OptionKind::InflCaplet, k, 2, &[strike], &ContourSpec::default()).unwrap()[0].price;
    let q = OptionQuote { kind: OptionKind::InflCaplet, k, j: 2, strike, price };
    c.bench_function("implied_vol_yoy", |b| b.iter(|| implied_vol(&cfg, black_box(&q)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = reference_config(3, &CalibrationSettings::default()).unwrap();
    let strikes = strike_grid(&cfg, OptionKind::CpiCall, 6, 0, &[-1.0, 0.0, 1.0]).unwrap();
    let quotes: Vec<OptionQuote> = strikes
        .iter()
        .map(|&strike| OptionQuote { kind: OptionKind::CpiCall, k: 6, j: 0, strike, price: 0.0 })
        .collect();
    let plan = SimulationPlan::new(20_000, 1);
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("cpi_calls_20k_paths", |b| b.iter(|| mc_price_batch(&cfg, black_box(&quotes), &plan).unwrap()));
    group.finish();
}

criterion_group!(benches, strips, vols, monte_carlo);
criterion_main!(benches);
