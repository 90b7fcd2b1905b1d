use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use suppdec::decoders::{decode_exhaustive, decode_lasso, decode_omp, ExhaustiveOptions, LassoOptions};
use suppdec_bench::{fresh_factorisation_argmin, instance};

fn exhaustive(c: &mut Criterion) {
    let mut g = c.benchmark_group("exhaustive");
    g.sample_size(10);
    for (p, s) in [(32usize, 3usize), (32, 4), (64, 3)] {
        let cache = instance(64, p, s, 1);
        let label = format!("p{p}_s{s}");
        g.bench_with_input(BenchmarkId::new("revolving_door", &label), &cache, |b, cache| {
            b.iter(|| decode_exhaustive(black_box(cache), s, &ExhaustiveOptions::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fresh_factorisation", &label), &cache, |b, cache| {
            b.iter(|| fresh_factorisation_argmin(black_box(cache), s))
        });
    }
    g.finish();
}

fn baselines(c: &mut Criterion) {
    let cache = instance(128, 256, 16, 3);
    c.bench_function("omp_p256_s16", |b| b.iter(|| decode_omp(black_box(&cache), 16).unwrap()));
    let cache = instance(32, 64, 8, 4);
    let opts = LassoOptions::default();
    c.bench_function("lasso_path_p64_s8", |b| {
        b.iter(|| decode_lasso(black_box(&cache), 8, None, &opts).unwrap())
    });
}

criterion_group!(benches, exhaustive, baselines);
criterion_main!(benches);
