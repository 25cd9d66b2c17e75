use proptest::prelude::*;

use ppsim_core::consensus::{
    combined_update, lambda_at, pull_update, push_gradients_full, LambdaSchedule, PullPushConfig, PushMode,
};
use ppsim_core::measures::kendall_tau;
use ppsim_core::objectives::{NoiseModel, QuadraticObjective};
use ppsim_core::param::mean_vectors;
use ppsim_core::theory::{gap_recurrence, GapRecurrenceConfig};
use ppsim_core::trainer::{run, LocalOptConfig, TrainConfig};
use ppsim_core::{ParamVector, RngStream, DEFAULT_EPS0};

fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

fn cluster() -> impl Strategy<Value = Vec<ParamVector>> {
    (2usize..8, 1usize..12).prop_flat_map(|(m, d)| {
        prop::collection::vec(vec_strategy(d), m)
            .prop_map(|vs| vs.into_iter().map(ParamVector::from).collect::<Vec<_>>())
    })
}

proptest! {
    #[test]
    fn combined_update_maps_gap_norm(
        x in vec_strategy(6),
        dir in vec_strategy(6),
        r in 1e-3f64..10.0,
        alpha in 0.01f64..0.99,
        lambda in 0.0f64..1.0,
    ) {
        let dir = ParamVector::from(dir);
        prop_assume!(dir.norm() > 1e-3);
        let x_a = ParamVector::from(x);
        let mut x_m = x_a.clone();
        x_m.add_scaled(r / dir.norm(), &dir);
        let out = combined_update(&x_m, &x_a, alpha, lambda, DEFAULT_EPS0).unwrap();
        let expected = (r * (1.0 - alpha) + lambda).abs();
        prop_assert!((out.distance(&x_a) - expected).abs() < 1e-9 * (1.0 + expected));
    }

    #[test]
    fn pull_toward_average_keeps_average(ws in cluster(), alpha in 0.0f64..1.0) {
        let x_a = mean_vectors(&ws).unwrap();
        let pulled: Vec<_> = ws.iter().map(|w| pull_update(w, &x_a, alpha).unwrap()).collect();
        let after = mean_vectors(&pulled).unwrap();
        prop_assert!(after.distance(&x_a) < 1e-12 * (1.0 + x_a.norm()));
    }

    #[test]
    fn full_push_sums_to_zero(ws in cluster(), lambda_r in 0.0f64..2.0) {
        let g = push_gradients_full(&ws, lambda_r, DEFAULT_EPS0).unwrap();
        let total = mean_vectors(&g).unwrap();
        prop_assert!(total.norm() < 1e-12);
    }

    #[test]
    fn cosine_lambda_schedules_complement(t in 0usize..1000, extra in 0usize..1000, lmax in 0.0f64..3.0) {
        let total = t + extra + 1;
        let up = lambda_at(t, total, lmax, LambdaSchedule::CosineIncreasing).unwrap();
        let down = lambda_at(t, total, lmax, LambdaSchedule::CosineDecreasing).unwrap();
        prop_assert!((up + down - lmax).abs() < 1e-12);
        prop_assert!((0.0..=lmax).contains(&up));
    }

    #[test]
    fn kendall_is_symmetric_and_bounded(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..60)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ab = kendall_tau(&a, &b).unwrap();
        let ba = kendall_tau(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn recurrence_rises_monotonically_to_limit(alpha in 0.01f64..1.0, lambda in 0.0f64..1.0) {
        let r = gap_recurrence(&GapRecurrenceConfig::deterministic(alpha, lambda, 500)).unwrap();
        let limit = lambda / alpha;
        prop_assert!(r.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.iter().all(|v| *v <= limit * (1.0 + 1e-12)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn training_ignores_thread_count(seed in 0u64..1000, threads in 2usize..6) {
        let q = QuadraticObjective::random(8, 0.5, 2.0, 0.1, &mut RngStream::new(seed, 0)).unwrap();
        let pp = PullPushConfig::new(0.2, 0.1, 3).with_push(PushMode::FullGradient);
        let cfg = TrainConfig::new(5, pp, LocalOptConfig::sgd(0.05), 60, seed)
            .with_noise(NoiseModel::new(0.3).unwrap());
        let one = run(&q, &cfg.clone().with_threads(1)).unwrap();
        let many = run(&q, &cfg.with_threads(threads)).unwrap();
        prop_assert_eq!(one.x_a.as_slice(), many.x_a.as_slice());
        let d1: Vec<_> = one.metrics.rounds.iter().map(|r| r.consensus_distance.to_bits()).collect();
        let d2: Vec<_> = many.metrics.rounds.iter().map(|r| r.consensus_distance.to_bits()).collect();
        prop_assert_eq!(d1, d2);
    }
}
