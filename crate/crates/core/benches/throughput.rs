use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use robust_mimo::bench::{generate_channel, run_experiment_with, BenchConfig};
use robust_mimo::design::{robust_design, Method, Scheme};
use robust_mimo::oracle::sampled_worst_case_with;
use robust_mimo::parallel::Execution;
use robust_mimo::worstcase::DesignProblem;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn bench_experiment(c: &mut Criterion) {
    let cfg = BenchConfig {
        dims: vec![2, 4],
        rho: vec![0.01],
        trials: 16,
        methods: vec![Method::RobustOptimal, Method::Alternating(Scheme::I), Method::NonRobust],
        ..BenchConfig::default()
    };
    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_experiment_with(exec, black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let h = generate_channel(4, 4, 1);
    let eps = 0.1 * h.frobenius_norm();
    let problem = DesignProblem::new(h, eps, 1.0, 100.0, 4).unwrap();
    let t = robust_design(&problem).unwrap().transceiver;
    let mut group = c.benchmark_group("sampled_worst_case");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sampled_worst_case_with(exec, &t.f, &t.g, black_box(&problem), 10_000, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_experiment, bench_sampling);
criterion_main!(benches);
