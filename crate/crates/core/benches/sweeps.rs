use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use fal_core::convergence::{order_grid, sweep_orders};
use fal_core::energy::EnergyNorm;
use fal_core::exec::Execution;
use fal_core::fractional::{gl_oracle, FractionalOrder};
use fal_core::presets;

fn bench_order_sweep(c: &mut Criterion) {
    let nus = order_grid(0.05, 1.95, 0.05);
    let p = presets::fig2a();
    let mut group = c.benchmark_group("order_sweep_plateau");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                sweep_orders(
                    p.chi,
                    presets::RATE_ETA,
                    presets::RATE_S_STAR,
                    presets::RATE_S0,
                    black_box(&nus),
                    &p.plateau,
                    200_000,
                    exec,
                )
            })
        });
    }
    group.finish();
}

fn bench_gradient_curve(c: &mut Criterion) {
    let e = presets::derivative_energy();
    let nu = FractionalOrder::new(1.5).unwrap();
    let mut group = c.benchmark_group("gradient_curve_100k");
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                e.sample_gradient_curve(nu, black_box(-4.0), 8.0, 100_000, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_oracle_grid(c: &mut Criterion) {
    let e = EnergyNorm::new(10.0, 2.0, 5.0).unwrap();
    let coeffs = e.coefficients();
    let cases: Vec<(f64, f64)> = [0.5, 1.5]
        .iter()
        .flat_map(|&nu| [0.5, 1.0, 2.0, 4.0].map(move |s| (nu, s)))
        .collect();
    let mut group = c.benchmark_group("gl_oracle_grid");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map(&cases, |&(nu, s)| {
                    gl_oracle(&coeffs, FractionalOrder::new(nu).unwrap(), s, 1e-4).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_order_sweep,
    bench_gradient_curve,
    bench_oracle_grid
);
criterion_main!(benches);
