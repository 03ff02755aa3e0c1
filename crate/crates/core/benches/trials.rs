use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use expsum::experiments::{run_certificate, run_recovery, run_tail2};
use expsum::parallel::Execution;
use expsum::recovery::SolverConfig;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn tail2(c: &mut Criterion) {
    let mut group = c.benchmark_group("tail2_N97_n80");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_tail2(97, 80, 0.5, 2000, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn certificate(c: &mut Criterion) {
    let mut group = c.benchmark_group("certificate_N997_T2_C3");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_certificate(997, 2, 3.0, 200, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("recovery_N61_T2_C2");
    group.sample_size(10);
    let solver = SolverConfig::default();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_recovery(61, 2, 2.0, 8, 4, 1, 1e-6, &solver, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tail2, certificate, recovery);
criterion_main!(benches);
