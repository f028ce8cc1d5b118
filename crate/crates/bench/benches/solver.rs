use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loanmix_core::{
    grid_search_share, reference, solve_fixed_point, ChoiceContext, OracleConfig, Regime,
};

fn fixed_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_fixed_point");
    for (name, p) in reference::all() {
        for regime in [Regime::Portfolio, Regime::FundingDiversity] {
            group.bench_with_input(BenchmarkId::new(name, regime), &p, |b, p| {
                b.iter(|| solve_fixed_point(regime, black_box(p)).unwrap())
            });
        }
    }
    group.finish();
}

fn optimal_share(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_share");
    for (name, p) in reference::all() {
        let ctx = ChoiceContext::new(&p, 1.3, reference::WAGE).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| ctx.optimal_share(black_box(1.9)).unwrap())
        });
    }
    group.finish();
}

fn grid_search(c: &mut Criterion) {
    let p = reference::crra();
    let ctx = ChoiceContext::new(&p, 1.3, reference::WAGE).unwrap();
    let cfg = OracleConfig::default();
    c.bench_function("grid_search_share/crra", |b| {
        b.iter(|| grid_search_share(black_box(1.9), &ctx, &cfg).unwrap())
    });
}

criterion_group!(benches, fixed_point, optimal_share, grid_search);
criterion_main!(benches);
