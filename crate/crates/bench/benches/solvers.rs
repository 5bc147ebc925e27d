use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sben_bench::{loaded_crack, pulse_oscillator, ramp_slider};
use sben_core::convex::GridBox;
use sben_core::dynamics::OracleConfig;
use sben_core::sben::{minimize_incremental, SbenConfig};
use sben_core::scenarios::{run_scenario, Solver};
use sben_core::symplectic::{reference_phase_catalog, symplectic_polar_numeric, PhaseVector};

fn scenarios(c: &mut Criterion) {
    let cases = [
        ("oscillator", pulse_oscillator(), OracleConfig::new(0.01, 10.0).unwrap()),
        ("slider", ramp_slider(), OracleConfig::new(0.005, 10.0).unwrap()),
        ("crack", loaded_crack(), OracleConfig::new(0.01, 3.0).unwrap()),
    ];
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    for (name, s, cfg) in &cases {
        for solver in [Solver::Oracle, Solver::SbenIncremental] {
            g.bench_with_input(BenchmarkId::new(solver.name(), name), &(s, cfg), |b, (s, cfg)| {
                b.iter(|| run_scenario(s, cfg, solver).unwrap())
            });
        }
    }
    g.finish();
}

fn search_only(c: &mut Criterion) {
    let s = pulse_oscillator();
    let cfg = SbenConfig { certify_trial: false, ..SbenConfig::new(0.01, 10.0).unwrap() };
    c.bench_function("oscillator sben-incremental, search only", |b| b.iter(|| minimize_incremental(&s.problem(), &s.z0, &cfg).unwrap()));
}

fn global(c: &mut Criterion) {
    let s = pulse_oscillator();
    let cfg = OracleConfig::new(0.05, 10.0).unwrap();
    let mut g = c.benchmark_group("global");
    g.sample_size(10);
    g.bench_function("oscillator N=200", |b| b.iter(|| run_scenario(&s, &cfg, Solver::SbenGlobal).unwrap()));
    g.finish();
}

fn numeric_polar(c: &mut Criterion) {
    let (_, f) = reference_phase_catalog().into_iter().find(|(n, _)| *n == "quadratic").unwrap();
    let grid = GridBox::cube(2, 4.0).unwrap();
    let polar = symplectic_polar_numeric(&f, &grid, 201).unwrap();
    let z = PhaseVector::new(vec![0.3], vec![-0.7]).unwrap();
    c.bench_function("grid polar, 201² nodes", |b| b.iter(|| polar.eval(&z).unwrap()));
}

criterion_group!(benches, scenarios, search_only, global, numeric_polar);
criterion_main!(benches);
