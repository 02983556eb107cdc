//! Parallel-vs-sequential throughput for the trial-level workloads:
//! instance generation, estimator runs, and flat structural experiments.
//! The parallel arms exercise the rayon path behind the `parallel` feature;
//! building with `--no-default-features` leaves only the sequential arms.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use matchest::analysis::{run_experiment, ExperimentConfig};
use matchest::estimator::estimate_matching_size;
use matchest::instance::{generate, InstanceParams, WorldChoice};
use matchest::rng::{self, purpose};
use matchest::trials::{run_trials, Parallelism};

const TRIALS: u64 = 8;

fn modes() -> Vec<(&'static str, Parallelism)> {
    let mut m = vec![("sequential", Parallelism::Sequential)];
    if cfg!(feature = "parallel") {
        m.push(("rayon", Parallelism::Parallel));
    }
    m
}

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("instance_generation");
    group.sample_size(10);
    let base = InstanceParams::new(4096, 0.25, 0.05, 1).unwrap();
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::new(name, TRIALS), &mode, |b, &mode| {
            b.iter(|| {
                let sizes = run_trials(TRIALS, mode, |t| {
                    let mut p = base;
                    p.seed = rng::derive_seed(1, purpose::INSTANCE, t);
                    generate(&p, WorldChoice::Mixed).graph.edge_count()
                });
                black_box(sizes)
            })
        });
    }
    group.finish();
}

fn bench_estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimator_trials");
    group.sample_size(10);
    let params = InstanceParams::new(1024, 0.4, 0.05, 2).unwrap();
    let inst = generate(&params, WorldChoice::Yes);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::new(name, TRIALS), &mode, |b, &mode| {
            b.iter(|| {
                let estimates = run_trials(TRIALS, mode, |t| {
                    let mut r = rng::stream(2, purpose::ESTIMATOR, t);
                    estimate_matching_size(&inst.graph, 1024, 0.5, &mut r)
                        .unwrap()
                        .estimate
                });
                black_box(estimates)
            })
        });
    }
    group.finish();
}

fn bench_flat_experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("flat_experiment");
    group.sample_size(10);
    let params = InstanceParams::new(1024, 0.1, 0.05, 3).unwrap();
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::new(name, TRIALS), &mode, |b, &mode| {
            b.iter(|| {
                let mut cfg = ExperimentConfig::new(params, TRIALS);
                cfg.compute_mu = false;
                cfg.parallelism = mode;
                black_box(run_experiment(&cfg))
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_generation,
    bench_estimator,
    bench_flat_experiment
);
criterion_main!(benches);
