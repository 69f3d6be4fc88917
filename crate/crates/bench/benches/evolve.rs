use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heatsharp_core::gridfn::{heat_evolve, heat_evolve_fft, GridPlan};
use heatsharp_core::{Exponent, FunctionSpec, SharpConstants};
use std::hint::black_box;

fn evolve(c: &mut Criterion) {
    let spec = FunctionSpec::Indicator { lo: -1.0, hi: 1.0 };
    let mut group = c.benchmark_group("heat_evolve");
    group.sample_size(10);
    for resolution in [4.0, 8.0] {
        let f = GridPlan::for_spec(&spec, 0.1, 0.1, resolution)
            .unwrap()
            .sample(&spec)
            .unwrap();
        group.bench_with_input(BenchmarkId::new("direct", f.n()), &f, |b, f| {
            b.iter(|| heat_evolve(black_box(f), 0.1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fft", f.n()), &f, |b, f| {
            b.iter(|| heat_evolve_fft(black_box(f), 0.1).unwrap())
        });
    }
    group.finish();
}

fn constants(c: &mut Criterion) {
    let p: Exponent = "4/3".parse().unwrap();
    let q: Exponent = "3/2".parse().unwrap();
    c.bench_function("sharp_constants", |b| {
        b.iter(|| SharpConstants::new(black_box(p), black_box(q)).unwrap())
    });
}

criterion_group!(benches, evolve, constants);
criterion_main!(benches);
