use criterion::{criterion_group, criterion_main, Criterion};
use eventsync::segment::WindowStats;
use eventsync::sim::run_simulation;
use eventsync::SimConfig;

fn default_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("default_run_10k_steps", |b| {
        b.iter(|| {
            let out = run_simulation(SimConfig::default()).unwrap();
            assert_eq!(out.trace.len(), 10_000);
            out
        })
    });
    group.finish();
}

fn window_push(c: &mut Criterion) {
    c.bench_function("window_push_w1000", |b| {
        let mut stats = WindowStats::new(1000);
        for i in 0..1000 {
            stats.push(i as f64 * 1e-6);
        }
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            stats.push((i % 997) as f64 * 1e-6);
            stats.variance()
        })
    });
}

criterion_group!(benches, default_run, window_push);
criterion_main!(benches);
