use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use offset_root_core::stability::{scan_b_sequential, scan_config};
use offset_root_core::RootQuery;

// (x, d, b_min, b_max)
const CASES: [(f64, u32, f64, f64); 2] = [(1250.0, 3, 6.0, 9.0), (1250.0, 7, 3.0, 7.0)];
const STEPS: usize = 400;

fn bench_scan(c: &mut Criterion) {
    let template = scan_config().with_max_iter(20_000);
    let mut group = c.benchmark_group("scan_b");
    group.sample_size(10);
    for (x, d, lo, hi) in CASES {
        let q = RootQuery::new(x, d).unwrap();
        let id = format!("x{x}_d{d}");
        group.bench_with_input(BenchmarkId::new("sequential", &id), &q, |bench, q| {
            bench.iter(|| scan_b_sequential(black_box(q), lo, hi, STEPS, &template).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", &id), &q, |bench, q| {
            bench.iter(|| {
                offset_root_core::stability::scan_b_parallel(black_box(q), lo, hi, STEPS, &template).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scan);
criterion_main!(benches);
