//! Parallel vs single-threaded selection.
//!
//! The `sequential` cases run inside a one-thread rayon pool. For the build
//! with rayon compiled out entirely, run
//! `cargo bench -p submix-core --no-default-features`; every case then
//! reports sequential timings.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use submix_core::formats::load_manifest;
use submix_core::kernel::{build_kernel, KernelConfig};
use submix_core::synth::{generate, SynthSpec};
use submix_core::{naive_greedy, run_mixture, FunctionSpec, MixtureConfig, SubmodularFn};

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    vec![("sequential", Some(one)), ("parallel", None)]
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(feature = "parallel")]
fn in_mode<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_mode<R>(_: &Option<()>, f: impl FnOnce() -> R) -> R {
    f()
}

fn random_rows(n: usize, dim: usize) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn kernel(c: &mut Criterion) {
    let rows = random_rows(1000, 64);
    let mut g = c.benchmark_group("kernel_1000x64");
    for (name, pool) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| {
                in_mode(&pool, || {
                    build_kernel(&rows, &KernelConfig::default()).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn greedy(c: &mut Criterion) {
    let rows = random_rows(1000, 32);
    let k = build_kernel(&rows, &KernelConfig::default()).unwrap();
    let mut g = c.benchmark_group("naive_greedy_1000_k50");
    for spec in [
        FunctionSpec::FacilityLocation,
        FunctionSpec::GraphCut { lambda: 0.4 },
    ] {
        for (name, pool) in modes() {
            g.bench_with_input(
                BenchmarkId::new(name, format!("{spec:?}")),
                &spec,
                |b, &spec| {
                    b.iter(|| {
                        in_mode(&pool, || {
                            naive_greedy(&mut SubmodularFn::new(spec, &k).unwrap(), 50).unwrap()
                        })
                    })
                },
            );
        }
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec::tasks(40, 200, 16, 1).with_templates(&["a", "b", "c", "d"]);
    let manifest = load_manifest(generate(&spec, dir.path()).unwrap().manifest_path).unwrap();
    let config = MixtureConfig {
        f1: FunctionSpec::GraphCut { lambda: 0.4 },
        f2: FunctionSpec::FacilityLocation,
        task_budget: 10,
        instance_budget: 1000,
        seed: 0,
        kernel: KernelConfig::default(),
        per_task_cap: 20000,
    };
    let mut g = c.benchmark_group("run_mixture_40x200");
    g.sample_size(10);
    for (name, pool) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| in_mode(&pool, || run_mixture(&manifest, "m", &config).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernel, greedy, pipeline);
criterion_main!(benches);
