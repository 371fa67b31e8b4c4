use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use speechsum_bench::problem;
use speechsum_core::{
    exact_summary, fact_groups, greedy_summary, opt_prune, CostParams, PrunedGains,
    PruningConfig,
};

fn greedy_variants(c: &mut Criterion) {
    let p = problem(3, 8, 4000, 42);
    let mut group = c.benchmark_group("greedy");
    group.bench_function("base", |b| {
        b.iter(|| {
            let r = greedy_summary(
                &p.ds,
                &p.slice,
                0,
                p.prior,
                black_box(&p.catalog.facts),
                3,
                None,
                None,
            )
            .unwrap();
            black_box(r.utility)
        })
    });
    group.bench_function("opt-pruned", |b| {
        let groups = fact_groups(&p.catalog);
        let params = CostParams::new(&PruningConfig::default(), p.slice.len());
        let plan = opt_prune(&groups, &params);
        b.iter(|| {
            let mut provider = PrunedGains::new(&p.catalog, plan.clone());
            let r = greedy_summary(
                &p.ds,
                &p.slice,
                0,
                p.prior,
                black_box(&p.catalog.facts),
                3,
                Some(&mut provider),
                None,
            )
            .unwrap();
            black_box(r.utility)
        })
    });
    group.finish();
}

fn exact_small(c: &mut Criterion) {
    let p = problem(2, 3, 512, 7);
    c.bench_function("exact/12-facts-m3", |b| {
        b.iter(|| {
            let r = exact_summary(
                &p.ds,
                &p.slice,
                0,
                p.prior,
                black_box(&p.catalog.facts),
                3,
                0.0,
                None,
            )
            .unwrap();
            black_box(r.utility)
        })
    });
}

criterion_group!(benches, greedy_variants, exact_small);
criterion_main!(benches);
