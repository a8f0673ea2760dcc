use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use sturmian::liouville::MapMode;
use sturmian::solution::{SolverConfig, SolverState};
use sturmian::spectrum::{characteristic_function, compute_spectrum, SearchConfig};
use sturmian::{BoundaryConditions, SlProblem};

fn example_one() -> (SlProblem, BoundaryConditions, SolverConfig, SearchConfig) {
    let problem = SlProblem::new(1.0, 2.0, "y", "1/(4*y)+2*y/(y-1/2)^2", "y").unwrap();
    let config = SolverConfig {
        mode: MapMode::Symmetric,
        g_slope: Some(Complex64::new(5.0 / 3.0, 0.0)),
        ..SolverConfig::default()
    };
    let search = SearchConfig {
        omega_min: 1.0,
        omega_max: 101.0,
        ..SearchConfig::default()
    };
    (problem, BoundaryConditions::dirichlet(), config, search)
}

fn example_three() -> (SlProblem, BoundaryConditions, SolverConfig, SearchConfig) {
    let problem = SlProblem::new(0.0, 2.0, "exp(-2*y)", "-exp(-2*y)", "(y^2+1)*exp(-2*y)").unwrap();
    let bc = BoundaryConditions::from_real([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]]).unwrap();
    let config = SolverConfig {
        mode: MapMode::Endpoint,
        ..SolverConfig::default()
    };
    let search = SearchConfig {
        omega_min: 0.0,
        omega_max: 100.0,
        ..SearchConfig::default()
    };
    (problem, bc, config, search)
}

fn pipeline(c: &mut Criterion) {
    for (name, (problem, bc, config, search)) in [("example 1", example_one()), ("example 3", example_three())] {
        let mut group = c.benchmark_group(name);
        group.sample_size(20);
        group.bench_function("build", |b| {
            b.iter(|| SolverState::build(black_box(&problem), config.clone()).unwrap())
        });
        let state = SolverState::build(&problem, config.clone()).unwrap();
        group.bench_function("characteristic", |b| {
            b.iter(|| characteristic_function(&state, &bc, black_box(Complex64::new(37.3, 0.0))).unwrap())
        });
        group.bench_function("spectrum", |b| {
            b.iter(|| compute_spectrum(&problem, &state, &bc, black_box(&search)).unwrap())
        });
        group.finish();
    }
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
