use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ppsim_core::consensus::{PullPushConfig, PushMode};
use ppsim_core::exec::Pool;
use ppsim_core::landscape::{scan_grid, svd_basis};
use ppsim_core::measures::{inverse_mean_valley, ValleyParams};
use ppsim_core::objectives::{MlpConfig, MlpObjective, NoiseModel, Objective, QuadraticObjective};
use ppsim_core::rng::RngStream;
use ppsim_core::trainer::{run, LocalOptConfig, TrainConfig};

const WORKERS: usize = 8;

fn thread_counts() -> Vec<usize> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut t = vec![1, WORKERS.min(max)];
    t.dedup();
    t
}

fn bench_training(c: &mut Criterion) {
    let mlp = MlpObjective::generate(&MlpConfig {
        hidden: 32,
        num_shards: WORKERS,
        ..MlpConfig::default()
    })
    .unwrap();
    let pp = PullPushConfig::new(0.1, 0.05, 4).with_push(PushMode::Simplified);
    let mut group = c.benchmark_group("train_mlp");
    group.sample_size(10);
    for threads in thread_counts() {
        let cfg = TrainConfig::new(WORKERS, pp.clone(), LocalOptConfig::sgd(0.05), 200, 0)
            .with_noise(NoiseModel::new(0.1).unwrap())
            .with_threads(threads);
        group.bench_with_input(BenchmarkId::from_parameter(threads), &cfg, |b, cfg| {
            b.iter(|| run(&mlp, cfg).unwrap())
        });
    }
    group.finish();
}

fn trained_workers(obj: &dyn Objective) -> Vec<ppsim_core::ParamVector> {
    let mut rng = RngStream::new(1, 0);
    (0..WORKERS)
        .map(|_| {
            let mut x = obj.initial_point(&mut rng);
            x.iter_mut().for_each(|v| *v *= 0.5);
            x
        })
        .collect()
}

fn bench_scans(c: &mut Criterion) {
    let mlp = MlpObjective::generate(&MlpConfig::default()).unwrap();
    let workers = trained_workers(&mlp);
    let basis = svd_basis(&workers).unwrap();
    let mut group = c.benchmark_group("scan_grid_mlp");
    group.sample_size(10);
    for threads in thread_counts() {
        let pool = Pool::new(threads);
        group.bench_with_input(BenchmarkId::from_parameter(threads), &pool, |b, pool| {
            b.iter(|| pool.install(|| scan_grid(&mlp, &basis, 1.0, 0.1).unwrap()))
        });
    }
    group.finish();

    let q = QuadraticObjective::isotropic(200, 1.0, 1.0).unwrap();
    let workers = trained_workers(&q);
    let params = ValleyParams {
        step: 0.001,
        ..ValleyParams::default()
    };
    let mut group = c.benchmark_group("inv_mv_quadratic");
    for threads in thread_counts() {
        let pool = Pool::new(threads);
        group.bench_with_input(BenchmarkId::from_parameter(threads), &pool, |b, pool| {
            b.iter(|| pool.install(|| inverse_mean_valley(&workers, &q, &params, None).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_training, bench_scans);
criterion_main!(benches);
