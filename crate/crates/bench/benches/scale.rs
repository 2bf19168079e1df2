use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use skipfree::dividends::optimize_barrier;
use skipfree::{ClaimDistribution, DiscountedModel, Objective, ScaleTable};

fn gsy() -> ClaimDistribution {
    ClaimDistribution::from_strs(&["3/4", "1/20", "1/10", "0", "0", "0", "0", "1/10"]).unwrap()
}

fn table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("scale_table");
    for x_max in [100usize, 1_000, 10_000] {
        group.bench_with_input(BenchmarkId::new("plain", x_max), &x_max, |b, &n| {
            b.iter(|| ScaleTable::new(DiscountedModel::new(gsy(), 0.999).unwrap(), black_box(n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rescaled", x_max), &x_max, |b, &n| {
            b.iter(|| ScaleTable::rescaled(DiscountedModel::new(gsy(), 0.9).unwrap(), black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn optimize(c: &mut Criterion) {
    let t = ScaleTable::new(DiscountedModel::new(gsy(), 0.999).unwrap(), 260).unwrap();
    let mut group = c.benchmark_group("optimize_barrier");
    group.bench_function("definetti", |b| {
        b.iter(|| optimize_barrier(&t, Objective::Definetti, None, 0, black_box(200)).unwrap())
    });
    group.bench_function("doubly_reflected", |b| {
        b.iter(|| optimize_barrier(&t, Objective::DoublyReflected, Some(1.2), 0, black_box(200)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, table_build, optimize);
criterion_main!(benches);
