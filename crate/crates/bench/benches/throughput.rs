use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lrp_core::census::{enumerate_classes, expected_census_size, sample_micro_edges, MicroDomain};
use lrp_core::coupling::{couple_models, tv_bernoulli_poisson, CellPlacement};
use lrp_core::metric::{diameter_continuous, distance_continuous, distance_discrete};
use lrp_core::model::{sample_continuous, sample_discrete};
use lrp_core::{ContinuousParams, DiscreteParams, MetricMode};

fn continuous(length: f64, seed: u64) -> ContinuousParams {
    ContinuousParams {
        length,
        delta: 1.0,
        delta_prime: length,
        beta: 1.0,
        seed,
    }
}

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    for n in [1usize << 10, 1 << 14] {
        group.bench_with_input(BenchmarkId::new("discrete", n), &n, |b, &n| {
            b.iter(|| sample_discrete(&DiscreteParams::new(n, 1.0, 1)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("continuous", n), &n, |b, &n| {
            b.iter(|| sample_continuous(&continuous(n as f64, 1)).unwrap())
        });
    }
    group.finish();
}

fn distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance");
    for n in [1usize << 10, 1 << 14] {
        let g = sample_discrete(&DiscreteParams::new(n, 1.0, 2)).unwrap();
        group.bench_with_input(BenchmarkId::new("bfs", n), &g, |b, g| {
            b.iter(|| distance_discrete(g, 0, n, MetricMode::Unconstrained).unwrap())
        });
        let es = sample_continuous(&continuous(n as f64, 2)).unwrap();
        group.bench_with_input(BenchmarkId::new("dijkstra", n), &es, |b, es| {
            b.iter(|| distance_continuous(es, 0.0, n as f64, MetricMode::ConstrainedInterval).unwrap())
        });
    }
    let es = sample_continuous(&continuous(256.0, 3)).unwrap();
    group.bench_function("continuous_diameter/256", |b| b.iter(|| diameter_continuous(&es, 0.0, 256.0).unwrap()));
    group.finish();
}

fn coupling(c: &mut Criterion) {
    c.bench_function("tv/small_lambda", |b| b.iter(|| tv_bernoulli_poisson(black_box(0.01), black_box(0.0101))));
    c.bench_function("couple/64", |b| b.iter(|| couple_models(64, 1.0, 4, CellPlacement::Uniform).unwrap()));
}

fn census(c: &mut Criterion) {
    let domain = MicroDomain::new(8);
    c.bench_function("census/exact_n8_t1", |b| b.iter(|| expected_census_size(domain, 1.0, 1.0).unwrap()));
    let edges = sample_micro_edges(domain, 1.0, 5, 0).unwrap();
    c.bench_function("census/enumerate_n8_t2", |b| b.iter(|| enumerate_classes(&edges, 2.0, 0.5).unwrap()));
}

criterion_group!(benches, samplers, distances, coupling, census);
criterion_main!(benches);
