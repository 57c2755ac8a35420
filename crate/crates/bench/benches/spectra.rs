use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lamspec_bench::{coherent_drive, wide_grid};
use lamspec_core::{
    classical_reference_spectrum, integrate_bare, quantum_spectrum, FieldState, FrequencyGrid,
    IntegratorConfig, SystemParams,
};

fn closed_form(c: &mut Criterion) {
    let grid = wide_grid();
    let mut group = c.benchmark_group("quantum_spectrum");
    for alpha in [5.0, 10.0, 20.0] {
        let (state, params) = coherent_drive(alpha);
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &alpha, |b, _| {
            b.iter(|| quantum_spectrum(black_box(&state), &params, &grid).unwrap());
        });
    }
    group.finish();

    let params = SystemParams::default();
    c.bench_function("classical_reference_spectrum", |b| {
        b.iter(|| classical_reference_spectrum(&params, black_box(5.0), 0.0, &grid).unwrap());
    });
}

fn time_domain(c: &mut Criterion) {
    let grid = FrequencyGrid::new(-10.0, 10.0, 21).unwrap();
    let state = FieldState::single_fock(3);
    let params = SystemParams::default().with_gbar(1.0);
    let cfg = IntegratorConfig::resolving(&state, &params, &grid, IntegratorConfig::DEFAULT_T_END);
    let mut group = c.benchmark_group("integrate_bare");
    group.sample_size(10);
    group.bench_function("fock3", |b| {
        b.iter(|| integrate_bare(black_box(&state), &params, &grid, &cfg).unwrap());
    });
    group.finish();
}

criterion_group!(benches, closed_form, time_domain);
criterion_main!(benches);
