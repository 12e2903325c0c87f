use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use isorelabel::linear_strong::{strong_l0_ordinal, strong_l0p_linear};
use isorelabel::penalized::{penalized_linf, penalized_lp};
use isorelabel::relabel::l0_regression;
use isorelabel::{EdgeSet, Norm, ViolatorDag};
use isorelabel_bench::{all_violating_chain, half_swap_chain, random_chain};

fn violators(c: &mut Criterion) {
    let mut group = c.benchmark_group("violator_dag");
    for n in [256, 1024] {
        let inst = half_swap_chain(n);
        group.bench_with_input(
            BenchmarkId::new("closure/half_swap", n),
            &inst,
            |b, inst| b.iter(|| ViolatorDag::build(black_box(inst), EdgeSet::Closure)),
        );
        group.bench_with_input(
            BenchmarkId::new("reduction/half_swap", n),
            &inst,
            |b, inst| b.iter(|| ViolatorDag::build(black_box(inst), EdgeSet::Reduction)),
        );
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("l0_regression");
    group.sample_size(10);
    for n in [500, 2000] {
        let inst = all_violating_chain(n);
        group.bench_with_input(BenchmarkId::new("all_violating", n), &inst, |b, inst| {
            b.iter(|| l0_regression(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn linear_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("linear_strong");
    for n in [1000, 10_000] {
        let inst = random_chain(n, 10);
        group.bench_with_input(BenchmarkId::new("ordinal", n), &inst, |b, inst| {
            b.iter(|| strong_l0_ordinal(black_box(inst)).unwrap())
        });
        for (name, p) in [("l1", Norm::L1), ("l2", Norm::L2)] {
            group.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| strong_l0p_linear(black_box(inst), p).unwrap())
            });
        }
    }
    group.finish();
}

fn penalized(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalized");
    group.sample_size(10);
    for n in [300, 1000] {
        let inst = random_chain(n, 100);
        for (name, p) in [("l1", Norm::L1), ("l2", Norm::L2)] {
            group.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| penalized_lp(black_box(inst), 1.0, p).unwrap())
            });
        }
        group.bench_with_input(BenchmarkId::new("linf", n), &inst, |b, inst| {
            b.iter(|| penalized_linf(black_box(inst), 1.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, violators, flow, linear_dp, penalized);
criterion_main!(benches);
