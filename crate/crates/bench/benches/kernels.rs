use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wga_core::algebra::{norm, NormSpec};
use wga_core::bw::{self, BWConfig};
use wga_core::group::enumerate_ball;
use wga_core::sample::{rng, BallSampler, DEFAULT_SEED};
use wga_core::spectral;
use wga_core::{AlgebraElement, GroupSpec, GrowthCounts, GrowthFunction};

fn spec(name: &str) -> GroupSpec {
    GroupSpec::parse_short(name).unwrap()
}

fn ball(c: &mut Criterion) {
    let mut group = c.benchmark_group("ball");
    group.sample_size(10);
    for (name, radius) in [("z2", 30), ("f2", 8), ("heis", 10)] {
        let s = spec(name);
        group.bench_with_input(BenchmarkId::new(name, radius), &radius, |b, &r| {
            b.iter(|| enumerate_ball(black_box(&s), r).unwrap())
        });
    }
    group.finish();
}

fn convolution(c: &mut Criterion) {
    let table = enumerate_ball(&spec("f2"), 8).unwrap();
    let sampler = BallSampler::new(&table, 4).unwrap();
    let mut r = rng(DEFAULT_SEED);
    let mut group = c.benchmark_group("convolve");
    for support in [8usize, 64, 256] {
        let a = sampler.nonzero_element(&mut r, support);
        let b = sampler.nonzero_element(&mut r, support);
        group.bench_with_input(BenchmarkId::from_parameter(support), &(a, b), |bench, (a, b)| {
            bench.iter(|| a.convolve(black_box(b)).unwrap())
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let table = enumerate_ball(&spec("f2"), 8).unwrap();
    let sampler = BallSampler::new(&table, 8).unwrap();
    let a = sampler.nonzero_element(&mut rng(DEFAULT_SEED), 512);
    let mut group = c.benchmark_group("norm");
    for name in ["poly(1,1)", "subexp(0.5)", "factorial"] {
        let sigma: GrowthFunction = name.parse().unwrap();
        group.bench_function(BenchmarkId::new("l1", name), |b| {
            b.iter(|| norm(black_box(&a), &NormSpec::l1(&sigma, 2.0, &table)).unwrap())
        });
        group.bench_function(BenchmarkId::new("sup", name), |b| {
            b.iter(|| norm(black_box(&a), &NormSpec::sup(&sigma, -2.0, &table)).unwrap())
        });
    }
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let counts = GrowthCounts::for_spec(&spec("f2"), 30, 1 << 22).unwrap();
    let sigma: GrowthFunction = "subexp(1)".parse().unwrap();
    let grid = spectral::default_grid();
    c.bench_function("gp_verdict/f2/30", |b| {
        b.iter(|| spectral::gp_verdict(black_box(&counts), &sigma, &grid, 30, spectral::DEFAULT_DELTA).unwrap())
    });
}

fn seminorms(c: &mut Criterion) {
    let mut group = c.benchmark_group("bw");
    group.sample_size(10);
    let z = enumerate_ball(&spec("z"), 40).unwrap();
    let unit = AlgebraElement::unit(z.spec().family());
    let e = z.spec().identity();
    for m in [1u32, 2, 3] {
        let cfg = BWConfig::new(1.0, m, 0, 20).unwrap();
        group.bench_with_input(BenchmarkId::new("z", m), &cfg, |b, cfg| {
            b.iter(|| bw::h_value(black_box(&unit), cfg, &z, &e).unwrap())
        });
    }
    let f2 = enumerate_ball(&spec("f2"), 4).unwrap();
    let a = AlgebraElement::from_text(f2.spec().family(), "1 0 1\n0.5 -0.5 ab\n").unwrap();
    let cfg = BWConfig::new(0.5, 2, 0, 4).unwrap();
    group.bench_function("f2_exact/2", |b| b.iter(|| bw::h_value(black_box(&a), &cfg, &f2, &f2.spec().identity()).unwrap()));
    group.finish();
}

criterion_group!(benches, ball, convolution, norms, diagnostics, seminorms);
criterion_main!(benches);
