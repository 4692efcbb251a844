use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use selmer_core::census::{count_ap, count_sp, ApMode};
use selmer_core::curve::count_points_with;
use selmer_core::hurwitz::hurwitz_class_number;
use selmer_core::lift::{rank_mod_p_squared, rank_mod_p_squared_oracle};
use selmer_core::{QrTable, Residue};

fn point_counts(c: &mut Criterion) {
    let table = QrTable::new(149);
    c.bench_function("count_points p=149", |b| {
        b.iter(|| count_points_with(black_box(3), black_box(5), &table))
    });
    c.bench_function("count_sp p=149", |b| b.iter(|| count_sp(black_box(149)).unwrap()));
}

fn rank_tests(c: &mut Criterion) {
    // (3, 5) mod 49 sits above an anomalous curve
    let (a, b) = (Residue::new(3, 49), Residue::new(5, 49));
    c.bench_function("rank division polynomial p=7", |bn| {
        bn.iter(|| rank_mod_p_squared(black_box(a), black_box(b), 7).unwrap())
    });
    c.bench_function("rank p-adic oracle p=7", |bn| {
        bn.iter(|| rank_mod_p_squared_oracle(black_box(a), black_box(b), 7).unwrap())
    });
    c.bench_function("count_ap fiber p=31", |bn| bn.iter(|| count_ap(black_box(31), ApMode::Fiber).unwrap()));
}

fn class_numbers(c: &mut Criterion) {
    c.bench_function("hurwitz disc=-4*997+1", |b| {
        b.iter(|| hurwitz_class_number(black_box(1 - 4 * 997)).unwrap())
    });
}

criterion_group!(benches, point_counts, rank_tests, class_numbers);
criterion_main!(benches);
