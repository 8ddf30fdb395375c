use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deldyn::action::{make_clean_map, product_update};
use deldyn::bisim::{canonical_form, refine};
use deldyn::dynamics::iterate_with;
use deldyn::gen::{random_clean_action, random_model, rng};
use deldyn::turing::{compile_tm, successor_machine, successor_start};
use deldyn::Signature;

fn sig() -> Arc<Signature> {
    Arc::new(Signature::new(["p", "q", "r"], ["a", "b"]).unwrap())
}

fn partition_refinement(c: &mut Criterion) {
    let mut group = c.benchmark_group("refine");
    for n in [16, 64, 256] {
        let x = random_model(&mut rng(n as u64), &sig(), n, 4.0 / n as f64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| refine(black_box(x), None)));
    }
    group.finish();
}

fn canonical_forms(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonical_form");
    for n in [16, 64, 256] {
        let x = random_model(&mut rng(100 + n as u64), &sig(), n, 4.0 / n as f64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| canonical_form(black_box(x))));
    }
    group.finish();
}

fn update(c: &mut Criterion) {
    let mut group = c.benchmark_group("product_update");
    let mut r = rng(7);
    let action = random_clean_action(&mut r, &sig(), 6);
    let map = make_clean_map(action, &[], false).unwrap();
    for n in [16, 64, 256] {
        let x = random_model(&mut r, &sig(), n, 4.0 / n as f64);
        group.bench_with_input(BenchmarkId::new("raw", n), &x, |b, x| {
            b.iter(|| product_update(black_box(x), map.model()))
        });
        group.bench_with_input(BenchmarkId::new("clean", n), &x, |b, x| b.iter(|| map.apply(black_box(x))));
    }
    group.finish();
}

fn successor_orbit(c: &mut Criterion) {
    let compiled = compile_tm(&successor_machine(), 8).unwrap();
    let x0 = compiled.encode(&successor_start()).unwrap();
    c.bench_function("successor_orbit_100", |b| {
        b.iter(|| iterate_with(|x| compiled.step(x), black_box(&x0), 100, None).unwrap())
    });
}

criterion_group!(benches, partition_refinement, canonical_forms, update, successor_orbit);
criterion_main!(benches);
