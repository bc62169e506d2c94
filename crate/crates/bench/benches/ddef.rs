use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ddef_bench::{model, model_text};
use ddef_core::check::{first_box_program, run_checks, CheckOptions};
use ddef_core::definitions::builtin_registry;
use ddef_core::oracle::{Policy, State};
use ddef_core::{parse_model, Evaluator, ExistenceMode, Ident, OracleConfig};

fn eval_function(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval_function");
    for name in ["sin", "exp", "tanh"] {
        group.bench_function(format!("{name}_cold"), |b| {
            b.iter_batched(
                || Evaluator::new(builtin_registry(), OracleConfig::default()),
                |ev| ev.eval_named(name, black_box(7.3)).unwrap(),
                BatchSize::SmallInput,
            )
        });
        let ev = Evaluator::new(builtin_registry(), OracleConfig::default());
        group.bench_function(format!("{name}_sweep"), |b| {
            b.iter(|| (0..200).map(|i| ev.eval_named(name, -10.0 + 0.1 * i as f64).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

fn parse_print(c: &mut Criterion) {
    let text = model_text("robot.dlm");
    c.bench_function("parse_robot", |b| b.iter(|| parse_model(black_box(&text)).unwrap()));
    let m = model("robot.dlm");
    c.bench_function("print_robot", |b| b.iter(|| black_box(&m).to_string()));
}

fn simulation(c: &mut Criterion) {
    let m = model("pendulum.dlm");
    let ev = Evaluator::new(m.registry(ExistenceMode::Sound).unwrap(), OracleConfig { horizon: 20.0, ..OracleConfig::default() });
    let program = first_box_program(&m.problem).unwrap();
    let s0: State = [("g", 9.8), ("L", 1.0), ("k", 0.3), ("theta", 0.0), ("w", 0.0), ("push", 0.0)]
        .iter()
        .map(|(k, v)| (Ident::new(*k), *v))
        .collect();
    let policy = Policy { loops: (10, 10), duration: (0.0, 2.0), ..Policy::default() };
    c.bench_function("simulate_pendulum", |b| b.iter(|| ev.simulate(program, &s0, &policy, black_box(5)).unwrap()));

    let flight = model("flight.dlm");
    let ev = Evaluator::new(flight.registry(ExistenceMode::Sound).unwrap(), OracleConfig::default());
    let opts = CheckOptions { runs: 10, ..CheckOptions::default() };
    c.bench_function("check_flight_10_runs", |b| b.iter(|| run_checks(&ev, &flight, &opts)));
}

criterion_group!(benches, eval_function, parse_print, simulation);
criterion_main!(benches);
