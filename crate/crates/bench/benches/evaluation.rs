use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use widthmin::generate::worked_start;
use widthmin::{evaluate, minimize, y_normal_form};
use widthmin_bench::{adler_pair, adler_structure, random_sentences};

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_adler");
    group.sample_size(10);
    for n in [3, 4] {
        let (raw, min) = adler_pair(n);
        let s = adler_structure(n, 10, 0.6, 42);
        group.bench_with_input(BenchmarkId::new("raw", n), &raw, |b, f| {
            b.iter(|| evaluate(black_box(f), &s).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("minimized", n), &min, |b, f| {
            b.iter(|| evaluate(black_box(f), &s).unwrap())
        });
    }
    group.finish();
}

fn rewriting(c: &mut Criterion) {
    let mut group = c.benchmark_group("rewrite");
    let (raw, _) = adler_pair(6);
    group.bench_function("minimize_adler6", |b| b.iter(|| minimize(black_box(&raw)).unwrap()));
    let start = worked_start();
    group.bench_function("normal_form_path", |b| {
        b.iter(|| y_normal_form(black_box(&start)).unwrap())
    });
    let sentences = random_sentences(20, 6, 7);
    group.bench_function("minimize_random", |b| {
        b.iter(|| {
            for f in &sentences {
                black_box(minimize(f).unwrap());
            }
        })
    });
    group.finish();
}

criterion_group!(benches, evaluation, rewriting);
criterion_main!(benches);
