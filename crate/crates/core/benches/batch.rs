use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rcesc_core::batch::map_sequential;
use rcesc_core::report::run_scenario;
use rcesc_core::scenario::{builtin, Scenario, BUILTINS};

fn workload() -> Vec<Scenario> {
    let mut out = Vec::new();
    for name in BUILTINS {
        for tau in [50.0, 100.0, 200.0, 400.0] {
            let mut s = builtin(name).unwrap();
            if let rcesc_core::rcesc::DitherSchedule::DecayingSinusoid { tau: t, .. } = &mut s.dither {
                *t = tau;
            }
            out.push(s);
        }
    }
    out
}

fn bench_batch(c: &mut Criterion) {
    let scenarios = workload();
    let mut group = c.benchmark_group("builtin_sweep");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| map_sequential(black_box(&scenarios), run_scenario)));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| rcesc_core::batch::map_parallel(black_box(&scenarios), run_scenario))
    });
    group.finish();
}

criterion_group!(benches, bench_batch);
criterion_main!(benches);
