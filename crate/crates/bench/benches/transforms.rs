use affine_inflation::calibrator::CalibrationSettings;
use affine_inflation::synthetic::{inflation_driver, nominal_driver, reference_config};
use affine_inflation::{AffineComponent, Cir};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

fn components(c: &mut Criterion) {
    let kinds = [
        ("cir", AffineComponent::Cir(Cir { lambda: 0.026, theta: 0.65, eta: 0.5, x0: 3.45 })),
        ("cir_jump", AffineComponent::CirJump(nominal_driver(3))),
        ("ou_jump", AffineComponent::OuJump(inflation_driver(3))),
    ];
    let u = Complex64::new(0.1, 7.5);
    for (name, comp) in kinds {
        c.bench_function(&format!("phi_psi_{name}"), |b| b.iter(|| comp.phi_psi(0, black_box(5.0), black_box(u)).unwrap()));
    }
}

fn model(c: &mut Criterion) {
    let cfg = reference_config(10, &CalibrationSettings::default()).unwrap();
    let s0 = cfg.initial_state();
    let z = Complex64::new(1.5, 3.0);
    c.bench_function("mgf_log_cpi_k20", |b| b.iter(|| cfg.mgf_log_cpi(20, black_box(z), &s0).unwrap()));
    c.bench_function("mgf_yoy_k20", |b| b.iter(|| cfg.mgf_yoy(20, 2, black_box(z), &s0).unwrap()));
}

criterion_group!(benches, components, model);
criterion_main!(benches);
