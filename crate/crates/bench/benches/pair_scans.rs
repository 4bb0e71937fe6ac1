use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holdervar::norms::{seminorm_var_with, PairStrategy};
use holdervar::VariableExponent;
use holdervar_bench::smooth_field;

fn pair_scans(c: &mut Criterion) {
    let alpha = VariableExponent::example(0.5, 0.4).unwrap();
    let mut group = c.benchmark_group("seminorm_var");
    group.sample_size(10);
    for nx in [17, 33, 65] {
        let u = smooth_field(1, nx, nx - 1);
        for (label, strategy) in [("exhaustive", PairStrategy::Exhaustive), ("windowed", PairStrategy::Windowed { radius: 2, coarse_target: 400 })] {
            group.bench_with_input(BenchmarkId::new(label, nx), &u, |b, u| {
                b.iter(|| seminorm_var_with(u, &alpha, strategy).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pair_scans);
criterion_main!(benches);
