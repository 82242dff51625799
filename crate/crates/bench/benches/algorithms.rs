use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rsmax_core::algorithms::{
    biobjective_robust, blocks_greedy, general_robust, greedy, ignore_first, three_phase, two_copy, GreedyBase,
};
use rsmax_core::bruteforce::{minimizer, opt_robust};
use rsmax_core::constraints::cardinality_system;
use rsmax_core::instances::{augment_with_copies, gen_random_coverage};
use rsmax_core::{Budget, Subset};

fn single_removal(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau=1");
    for n in [20, 40] {
        let inst = gen_random_coverage(n, 2 * n, 0.2, 1, 10, 1).unwrap();
        let f = &inst.oracle;
        let ground = f.ground();
        group.bench_with_input(BenchmarkId::new("greedy", n), &n, |b, _| {
            b.iter(|| greedy(f, &ground, 10, &Subset::empty(), 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ignore-first", n), &n, |b, _| {
            b.iter(|| ignore_first(f, &ground, 10).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("three-phase", n), &n, |b, _| {
            b.iter(|| three_phase(f, &ground, 10).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("biobjective-m2", n), &n, |b, _| {
            b.iter(|| biobjective_robust(f, &ground, 10, 2).unwrap())
        });
    }
    let base = gen_random_coverage(20, 40, 0.2, 2, 10, 0).unwrap();
    let (aug, _) = augment_with_copies(&base, 1).unwrap();
    let aug = aug.with_tau(1).unwrap();
    group.bench_function("two-copy/40", |b| b.iter(|| two_copy(black_box(&aug)).unwrap()));
    group.finish();
}

fn larger_tau(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau>1");
    let inst = gen_random_coverage(30, 60, 0.15, 3, 20, 2).unwrap();
    let f = &inst.oracle;
    group.bench_function("blocks/30", |b| {
        b.iter(|| blocks_greedy(f, &f.ground(), 20, 2, None).unwrap())
    });

    let small = gen_random_coverage(10, 20, 0.3, 4, 4, 2).unwrap();
    let sys = Arc::new(cardinality_system(10, 4).unwrap());
    group.bench_function("general/10", |b| {
        b.iter(|| general_robust(&small.oracle, sys.clone(), 2, &GreedyBase).unwrap())
    });
    group.finish();
}

fn brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute-force");
    let budget = Budget::default();
    let inst = gen_random_coverage(12, 24, 0.25, 5, 5, 1).unwrap();
    group.bench_function("opt/n12-k5-tau1", |b| {
        b.iter(|| opt_robust(black_box(&inst), &budget).unwrap())
    });
    let big = gen_random_coverage(30, 60, 0.2, 6, 15, 3).unwrap();
    let a: Subset = (0..15).collect();
    group.bench_function("minimizer/k15-tau3", |b| {
        b.iter(|| minimizer(&big.oracle, black_box(&a), 3, &budget).unwrap())
    });
    group.finish();
}

criterion_group!(benches, single_removal, larger_tau, brute_force);
criterion_main!(benches);
