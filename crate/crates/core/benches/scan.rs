use captiveeq::mapper::{scan_grid, ClassifyConfig, GridConfig};
use captiveeq::Execution;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn scan(c: &mut Criterion) {
    let grid = GridConfig::with_spacing(0.02);
    let cfg = ClassifyConfig::default();
    let mut group = c.benchmark_group("scan_0.02");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| scan_grid(black_box(&grid), &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, scan);
criterion_main!(benches);
