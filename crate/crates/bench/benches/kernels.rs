use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use crw_qed::bound_states::solve_bound_state;
use crw_qed::decay::decay_spectrum;
use crw_qed::dynamics::{bessel_profile, evolve, uniform_grid};
use crw_qed::model::{build_system_hamiltonian, build_total_hamiltonian, discretize_flat_bath};
use crw_qed::oracle::diagonalize_system;
use crw_qed::scattering::{interior_k_grid, scan_spectrum};
use crw_qed::{BasisLabel, Branch, DissipationRates, EvolveOptions, Method, SystemParams};

fn params(n_sites: usize) -> SystemParams {
    SystemParams::new(5.0, 1.0, 6.0, 1.5, n_sites).unwrap()
}

fn analytic(c: &mut Criterion) {
    let p = params(3);
    let grid = interior_k_grid(512);
    let d = DissipationRates::new(0.1, 0.4).unwrap();
    c.bench_function("scan_spectrum ideal 512", |b| b.iter(|| scan_spectrum(&p, None, black_box(&grid)).unwrap()));
    c.bench_function("scan_spectrum dissipative 512", |b| {
        b.iter(|| scan_spectrum(&p, Some(&d), black_box(&grid)).unwrap())
    });
    c.bench_function("solve_bound_state", |b| {
        b.iter(|| solve_bound_state(black_box(&p), Branch::Above).unwrap())
    });
    c.bench_function("bessel_profile t=50", |b| b.iter(|| bessel_profile(&p, 0.1, black_box(50.0))));
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let p = params(201);
    group.bench_function("diagonalize_system 201", |b| b.iter(|| diagonalize_system(black_box(&p)).unwrap()));
    let grid = interior_k_grid(128);
    group.bench_function("decay_spectrum 128 on 201", |b| {
        b.iter(|| decay_spectrum(&p, 0.1, 0.4, black_box(&grid), 201).unwrap())
    });
    group.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    let p = params(201);
    let h = build_system_hamiltonian(&p).unwrap();
    let t = uniform_grid(20.0, 40);
    for (name, method) in [
        ("adaptive", Method::default()),
        ("fixed-step", Method::FixedStep { dt: 0.01 }),
        ("chebyshev", Method::Chebyshev),
    ] {
        let opts = EvolveOptions::default().with_method(method);
        group.bench_function(format!("chain 201 {name}"), |b| {
            b.iter(|| evolve(&h, BasisLabel::AtomExcited, black_box(&t), &opts).unwrap())
        });
    }
    let small = params(41);
    let res = discretize_flat_bath(0.01, 5.0, 8.0, 200).unwrap();
    let atom = discretize_flat_bath(0.16, 5.0, 8.0, 200).unwrap();
    let total = build_total_hamiltonian(&small, &res, &atom).unwrap();
    let opts = EvolveOptions::default().with_method(Method::Chebyshev);
    group.bench_function("chain 41 with baths chebyshev", |b| {
        b.iter(|| evolve(&total, BasisLabel::AtomExcited, black_box(&t), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, analytic, oracle, dynamics);
criterion_main!(benches);
