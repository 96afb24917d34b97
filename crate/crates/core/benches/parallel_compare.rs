//! Fan-out throughput: the multi-start searches on the default worker pool
//! against the same work forced onto a single thread.
//!
//! With the `parallel` feature (the default) each workload is measured
//! twice, once on the process-wide pool and once inside a one-thread scoped
//! pool, so the speedup is visible in a single run. Building the bench with
//! `--no-default-features` measures the plain sequential fallback instead;
//! the values are comparable across runs because every search derives its
//! randomness from the same seeds regardless of scheduling.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rankcapra_core::capra::variational_bound;
use rankcapra_core::matrix_norms::{dual_rrank_generic, SourceNorm};
use rankcapra_core::random::{random_gaussian, Seed};
use rankcapra_core::vector_norms::{dual_norm_oracle, SymmetricGauge};

fn run_workloads(c: &mut Criterion, label: &str, wrap: impl Fn(&(dyn Fn() -> f64 + Sync)) -> f64) {
    let m5 = random_gaussian(5, 5, Seed(11)).unwrap();
    let fro = SourceNorm::frobenius();

    c.bench_function(&format!("dual_rrank_generic 5x5 r=2 x64 [{label}]"), |b| {
        b.iter(|| wrap(&|| dual_rrank_generic(&fro, 2, black_box(&m5), 64, Seed(3)).unwrap()))
    });

    c.bench_function(
        &format!("variational_bound 5x5 budget 2000 [{label}]"),
        |b| {
            b.iter(|| {
                wrap(&|| {
                    variational_bound(&fro, black_box(&m5), 2000, Seed(4))
                        .unwrap()
                        .lower
                })
            })
        },
    );

    let x: Vec<f64> = (0..12).map(|i| ((i * 37 + 5) % 11) as f64 - 5.0).collect();
    let gauge = SymmetricGauge::ksupport2(3).unwrap();
    c.bench_function(
        &format!("dual_norm_oracle d=12 budget 512 [{label}]"),
        |b| b.iter(|| wrap(&|| dual_norm_oracle(&gauge, black_box(&x), 512, Seed(5)).unwrap())),
    );
}

#[cfg(feature = "parallel")]
fn bench(c: &mut Criterion) {
    run_workloads(c, "pool", |f| f());
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    run_workloads(c, "1 thread", |f| single.install(|| f()));
}

#[cfg(not(feature = "parallel"))]
fn bench(c: &mut Criterion) {
    run_workloads(c, "sequential", |f| f());
}

criterion_group!(benches, bench);
criterion_main!(benches);
