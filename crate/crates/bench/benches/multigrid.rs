use std::f64::consts::FRAC_PI_4;

use airg_core::hierarchy::estimate_truncate_start_level;
use airg_core::{setup, vcycle, AdvectionProblem, SetupConfig, SolveConfig};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn config(n: usize) -> SetupConfig {
    let mut cfg = SetupConfig::default();
    cfg.auto_truncate_start_level = estimate_truncate_start_level(n, 2, cfg.coarsest_poly_order);
    cfg
}

fn bench_setup(c: &mut Criterion) {
    let mut g = c.benchmark_group("setup");
    g.sample_size(10);
    for n in [64, 128] {
        let (a, _) = AdvectionProblem::from_angle(n, n, FRAC_PI_4).build().unwrap();
        let cfg = config(a.nrows());
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| setup(black_box(a), &cfg).unwrap()));
    }
    g.finish();
}

fn bench_vcycle(c: &mut Criterion) {
    let mut g = c.benchmark_group("vcycle");
    for n in [64, 128, 256] {
        let (a, _) = AdvectionProblem::from_angle(n, n, FRAC_PI_4).build().unwrap();
        let h = setup(&a, &config(a.nrows())).unwrap();
        let r = vec![1.0; a.nrows()];
        let cfg = SolveConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| vcycle(h, 0, black_box(&r), &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_setup, bench_vcycle);
criterion_main!(benches);
