//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then asserts.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ppsim_core::consensus::{combined_update, pull_update, push_gradient_full, push_gradients_full, push_update_simplified, qsr_period, PullPushConfig, PushMode};
use ppsim_core::landscape::{interpolation_scan, scan_grid, svd_basis};
use ppsim_core::measures::{inverse_mean_valley, kendall_tau, ValleyParams};
use ppsim_core::objectives::{Basin, MultiBasinObjective, NoiseModel, Objective, QuadraticObjective};
use ppsim_core::param::{mean_vectors, ParamVector};
use ppsim_core::rng::{RngStream, ANALYSIS_STREAM, DATA_STREAM};
use ppsim_core::theory::{
    circle_spread, equally_spaced_angles, gap_recurrence, geometric_grid, mean_unit_vector_check, pac_bayes_gap,
    GapRecurrenceConfig, PacBayesParams,
};
use ppsim_core::trainer::{run, LocalOptConfig, LrSchedule, RunResult, TrainConfig};
use ppsim_core::DEFAULT_EPS0;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:02} {verdict} {name} | {detail}");
    assert!(pass, "criterion {id:02} failed: {detail}");
}

fn normal_vec(d: usize, rng: &mut RngStream) -> ParamVector {
    ParamVector::from((0..d).map(|_| rng.normal()).collect::<Vec<_>>())
}

fn unit_vec(d: usize, rng: &mut RngStream) -> ParamVector {
    let v = normal_vec(d, rng);
    let n = v.norm();
    v.scaled(1.0 / n)
}

fn valley_quadratic() -> QuadraticObjective {
    QuadraticObjective::random(100, 0.5, 2.0, 0.0, &mut RngStream::new(0, DATA_STREAM)).unwrap()
}

fn valley_config(pp: PullPushConfig) -> TrainConfig {
    let opt = LocalOptConfig::sgd(1e-3).with_schedule(LrSchedule::Cosine);
    TrainConfig::new(8, pp, opt, 2000 * 4, 0).with_noise(NoiseModel::new(0.1).unwrap())
}

#[test]
fn criterion_01_valley_width_stabilizes() {
    let q = valley_quadratic();
    let pp = PullPushConfig::new(0.1, 0.5, 4).with_push(PushMode::Simplified);
    let start = Instant::now();
    let res = run(&q, &valley_config(pp)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let d = res.metrics.terminal_consensus_distance().unwrap();
    let pass = (4.5..=5.5).contains(&d) && secs < 10.0;
    report(
        1,
        "consensus distance stabilizes near lambda/alpha = 5",
        pass,
        &format!("terminal distance {d:.6} (band [4.5, 5.5]), {secs:.2} s single-threaded (limit 10 s)"),
    );
}

fn collapse_ratio(res: &RunResult) -> (f64, f64, f64) {
    let terminal = res.metrics.terminal_consensus_distance().unwrap();
    let peak = res.metrics.peak_consensus_distance().unwrap();
    (terminal, peak, terminal / peak)
}

#[test]
fn criterion_02_valley_collapse_without_push() {
    let q = valley_quadratic();
    let mut pass = true;
    let mut details = Vec::new();
    for alpha in [0.001, 0.005, 0.01, 0.05] {
        let pp = PullPushConfig::new(alpha, 0.0, 4);
        let start = Instant::now();
        let res = run(&q, &valley_config(pp.clone()).with_independent_init(true)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let (terminal, peak, ratio) = collapse_ratio(&res);
        let common = run(&q, &valley_config(pp)).unwrap();
        let (_, _, common_ratio) = collapse_ratio(&common);
        pass &= ratio < 0.01 && secs < 10.0;
        details.push(format!(
            "alpha={alpha}: {terminal:.3e}/{peak:.3e} = {ratio:.2e} in {secs:.2} s (shared-start diagnostic {common_ratio:.2e})"
        ));
    }
    report(
        2,
        "consensus distance collapses below 1% of its peak without push",
        pass,
        &details.join("; "),
    );
}

/// `R = -(1/M) sum_i ||x_i - mean||`.
fn regularizer(ws: &[ParamVector]) -> f64 {
    let m = ws.len() as f64;
    let d = ws[0].dim();
    let mean: Vec<f64> = (0..d).map(|k| ws.iter().map(|w| w[k]).sum::<f64>() / m).collect();
    -ws.iter()
        .map(|w| w.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .sum::<f64>()
        / m
}

#[test]
fn criterion_03_push_gradient_matches_finite_differences() {
    let mut rng = RngStream::new(3, ANALYSIS_STREAM);
    let mut worst_rel: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..100 {
        let m = 2 + rng.below(7);
        let d = 1 + rng.below(50);
        let lambda_r = rng.uniform_range(0.1, 2.0);
        let ws: Vec<ParamVector> = (0..m).map(|_| normal_vec(d, &mut rng)).collect();
        let target = rng.below(m);
        let push = push_gradient_full(&ws, target, lambda_r, DEFAULT_EPS0).unwrap();
        let h = 1e-5;
        let fd: Vec<f64> = (0..d)
            .map(|k| {
                let mut plus = ws.clone();
                plus[target][k] += h;
                let mut minus = ws.clone();
                minus[target][k] -= h;
                (regularizer(&plus) - regularizer(&minus)) / (2.0 * h)
            })
            .collect();
        // push = -lambda_r dR/dx_m
        let analytic = push.scaled(-1.0 / lambda_r);
        let err = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst_rel = worst_rel.max(err / analytic.norm());
        let all = push_gradients_full(&ws, lambda_r, DEFAULT_EPS0).unwrap();
        for k in 0..d {
            worst_sum = worst_sum.max(all.iter().map(|p| p[k]).sum::<f64>().abs());
        }
    }
    report(
        3,
        "full push gradient matches central differences and sums to zero",
        worst_rel < 1e-6 && worst_sum < 1e-12,
        &format!("max relative error {worst_rel:.2e} (limit 1e-6), max |sum over workers| {worst_sum:.2e} (limit 1e-12)"),
    );
}

#[test]
fn criterion_04_combined_update_equals_pull_then_push() {
    let mut rng = RngStream::new(4, ANALYSIS_STREAM);
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let d = 1 + rng.below(20);
        let alpha = rng.uniform_range(0.0, 1.0).max(1e-9);
        let lambda = rng.uniform_range(0.0, 1.0);
        let gap = 10f64.powf(rng.uniform_range(-6.0, 1.0));
        let x_a = normal_vec(d, &mut rng);
        let mut x_m = x_a.clone();
        x_m.add_scaled(gap, &unit_vec(d, &mut rng));
        let sequential =
            push_update_simplified(&pull_update(&x_m, &x_a, alpha).unwrap(), &x_a, lambda, DEFAULT_EPS0).unwrap();
        let combined = combined_update(&x_m, &x_a, alpha, lambda, DEFAULT_EPS0).unwrap();
        for (a, b) in sequential.iter().zip(combined.iter()) {
            if (a - b).abs() > worst {
                worst = (a - b).abs();
                // Rounding of the pulled point relative to the pulled gap.
                let scale = x_a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                at = (alpha, gap, (1.0 - alpha) * gap, lambda * f64::EPSILON * scale / ((1.0 - alpha) * gap));
            }
        }
    }
    report(
        4,
        "one-step combined update equals sequential pull then push",
        worst < 1e-12,
        &format!(
            "max coordinate difference {worst:.2e} over 1000 cases (limit 1e-12); worst case alpha {:.4}, gap {:.2e}, pulled gap {:.2e}, rounding estimate {:.1e}",
            at.0, at.1, at.2, at.3
        ),
    );
}

#[test]
fn criterion_05_recurrence_closed_form() {
    let mut rng = RngStream::new(5, ANALYSIS_STREAM);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let alpha = rng.uniform_range(0.0, 1.0).max(1e-9);
        let lambda = rng.uniform_range(0.0, 1.0);
        let r = gap_recurrence(&GapRecurrenceConfig::deterministic(alpha, lambda, 10_000)).unwrap();
        for (k, rk) in r.iter().enumerate() {
            let closed = lambda / alpha * (1.0 - (1.0 - alpha).powi(k as i32));
            worst = worst.max((rk - closed).abs());
        }
    }
    report(
        5,
        "gap recurrence matches its closed form",
        worst < 1e-12,
        &format!("max |r_k - closed form| {worst:.2e} over 20 (alpha, lambda), K = 10^4 (limit 1e-12)"),
    );
}

#[test]
fn criterion_06_inverse_mean_valley_matches_quadratic_identity() {
    let mut rng = RngStream::new(6, ANALYSIS_STREAM);
    let step = 0.01;
    let kappa = 2.0;
    let mut worst: f64 = 0.0;
    let mut below = false;
    for _ in 0..50 {
        let d = 2 + rng.below(9);
        let curv: Vec<f64> = (0..d).map(|_| rng.uniform_range(0.2, 5.0)).collect();
        let center = normal_vec(d, &mut rng);
        let q = QuadraticObjective::new(curv.clone(), center.to_vec(), 1.0).unwrap();
        let mut ws = Vec::new();
        for radius in [0.5, 0.7] {
            let dir = unit_vec(d, &mut rng);
            for s in [1.0, -1.0] {
                let mut w = center.clone();
                w.add_scaled(s * radius, &dir);
                ws.push(w);
            }
        }
        let x_a = mean_vectors(&ws).unwrap();
        let f_a = q.value(&x_a).unwrap();
        let p = ValleyParams {
            kappa,
            step,
            max_steps: 1_000_000,
        };
        let betas = inverse_mean_valley(&ws, &q, &p, None).unwrap().per_direction_betas.unwrap();
        for (w, beta) in ws.iter().zip(&betas) {
            let delta = w.sub(&x_a);
            let delta = delta.scaled(1.0 / delta.norm());
            let curvature: f64 = delta.iter().zip(&curv).map(|(v, c)| c * v * v).sum();
            let exact = (2.0 * (kappa - 1.0) * f_a / curvature).sqrt();
            worst = worst.max((beta - exact).abs());
            below |= *beta < exact - 1e-9;
        }
    }
    report(
        6,
        "boundary distances match sqrt(2 (kappa - 1) f / d^T H d)",
        worst <= step && !below,
        &format!("max |beta - exact| {worst:.4} over 50 quadratics x 4 directions (limit one step {step}), overshoot only: {}", !below),
    );
}

fn kendall_brute(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let x = (a[i] - a[j]).partial_cmp(&0.0).unwrap() as i64;
            let y = (b[i] - b[j]).partial_cmp(&0.0).unwrap() as i64;
            s += x * y;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn criterion_07_kendall_matches_brute_force() {
    let mut rng = RngStream::new(7, ANALYSIS_STREAM);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = 2 + rng.below(49);
        let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        if kendall_tau(&a, &b).unwrap() != kendall_brute(&a, &b) {
            mismatches += 1;
        }
    }
    let sorted: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
    let reversed: Vec<f64> = sorted.iter().rev().copied().collect();
    let same = kendall_tau(&sorted, &sorted).unwrap();
    let rev = kendall_tau(&sorted, &reversed).unwrap();
    report(
        7,
        "Kendall tau agrees with brute-force pair counting",
        mismatches == 0 && same == 1.0 && rev == -1.0,
        &format!("{mismatches} mismatches over 200 inputs, tau(a,a) = {same}, tau(a,reversed) = {rev}"),
    );
}

#[test]
fn criterion_08_circle_arrangement() {
    let mut rng = RngStream::new(8, ANALYSIS_STREAM);
    let mut even_err: f64 = 0.0;
    for m in 2..=16 {
        let c = rng.uniform_range(0.5, 2.0);
        let s = circle_spread(&equally_spaced_angles(m, rng.uniform_range(0.0, TAU)), c).unwrap();
        even_err = even_err.max((s.direct - m as f64 * c * c).abs());
    }
    let mut exceed = 0;
    let mut identity_err: f64 = 0.0;
    for _ in 0..100_000 {
        let m = 2 + rng.below(15);
        let c = rng.uniform_range(0.5, 2.0);
        let angles: Vec<f64> = (0..m).map(|_| rng.uniform_range(0.0, TAU)).collect();
        let s = circle_spread(&angles, c).unwrap();
        if s.direct > m as f64 * c * c + 1e-9 {
            exceed += 1;
        }
        identity_err = identity_err.max((s.direct - s.identity).abs());
    }
    report(
        8,
        "equal spacing attains the maximum spread M C^2",
        even_err < 1e-9 && exceed == 0 && identity_err < 1e-10,
        &format!("equal-spacing error {even_err:.2e}, {exceed} of 10^5 random sets above M C^2, identity error {identity_err:.2e}"),
    );
}

#[test]
fn criterion_09_pac_bayes_gap_decreases() {
    let mut rng = RngStream::new(9, ANALYSIS_STREAM);
    let mut violations = 0;
    let mut points = 0;
    for _ in 0..100 {
        let r_min = 10f64.powf(rng.uniform_range(-2.0, 0.0));
        let r_max = r_min * 10f64.powf(rng.uniform_range(0.0, 3.0));
        let grid = geometric_grid(r_min, r_max, rng.uniform_range(0.05, 1.0)).unwrap();
        let p = PacBayesParams {
            d: 1 + rng.below(1000),
            c: 1.0 + rng.uniform_range(0.0, 2.0),
            d0: rng.uniform_range(0.1, 10.0),
            beta: rng.uniform_range(0.0, 0.95),
            sigma0: rng.uniform_range(0.1, 2.0),
            n: 2 + rng.below(100_000),
            delta: rng.uniform_range(0.01, 0.2),
            j: grid.len(),
        };
        let gaps: Vec<f64> = grid.iter().map(|r| pac_bayes_gap(*r, &p).unwrap()).collect();
        points += gaps.len();
        violations += gaps.windows(2).filter(|w| w[1] >= w[0]).count();
    }
    let p = PacBayesParams {
        d: 10,
        c: 1.0,
        d0: 1.0,
        beta: 0.0,
        sigma0: 1.0,
        n: 1001,
        delta: 0.05,
        j: 5,
    };
    let r: f64 = 2.0;
    let without_shape = ((p.d0 / (2.0 * p.sigma0 * p.sigma0 * r.powf(1.0 - p.beta))
        + (p.n as f64 * p.j as f64 / p.delta).ln())
        / (2.0 * (p.n as f64 - 1.0)))
        .sqrt();
    let at_one = pac_bayes_gap(r, &p).unwrap();
    report(
        9,
        "generalization gap term strictly decreases along the radius grid",
        violations == 0 && at_one == without_shape,
        &format!("{violations} increases over {points} grid points in 100 parameter sets; c = 1 value {at_one} vs term-free {without_shape}"),
    );
}

#[test]
fn criterion_10_qsr_schedule() {
    let a = qsr_period(0.05, 2, 0.25).unwrap();
    let b = qsr_period(0.8, 2, 0.25).unwrap();
    let etas: Vec<f64> = (0..400).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / 399.0)).collect();
    let taus: Vec<usize> = etas.iter().map(|e| qsr_period(*e, 2, 0.05).unwrap()).collect();
    let monotone = taus.windows(2).all(|w| w[1] <= w[0]);
    report(
        10,
        "quadratic synchronization rule periods",
        a == 25 && b == 2 && monotone,
        &format!("(beta 0.25, eta 0.05) -> {a}, (beta 0.25, eta 0.8, base 2) -> {b}, non-increasing in eta over 400 rates: {monotone}"),
    );
}

#[test]
fn criterion_11_mean_unit_vector_bound() {
    let mut rng = RngStream::new(11, ANALYSIS_STREAM);
    let mut pass = true;
    let mut details = Vec::new();
    for m in [2, 4, 8, 16] {
        for d in [2, 16, 256] {
            let r = mean_unit_vector_check(m, d, 10_000, &mut rng).unwrap();
            pass &= r.pass;
            details.push(format!("M={m} d={d}: {:.4} <= {:.4}", r.mean_norm, r.bound + 3.0 * r.std_err));
        }
    }
    report(11, "mean of M random unit vectors has norm at most 1/sqrt(M)", pass, &details.join(", "));
}

fn two_basins() -> MultiBasinObjective {
    MultiBasinObjective::new(
        vec![
            Basin::new(vec![-3.0, 0.0], 0.5, 100.0),
            Basin::new(vec![3.0, 0.0], 1.5, 1.0),
        ],
        1.0,
    )
    .unwrap()
}

const WIDE: usize = 1;

fn basin_config(push: bool, seed: u64) -> TrainConfig {
    let mut pp = PullPushConfig::new(0.1, 0.5, 4);
    if push {
        pp = pp.with_push(PushMode::Simplified);
    }
    let opt = LocalOptConfig::sgd(0.002).with_schedule(LrSchedule::Cosine);
    TrainConfig::new(8, pp, opt, 2000 * 4, seed).with_noise(NoiseModel::new(0.5).unwrap())
}

#[test]
fn criterion_12_push_prefers_the_wide_basin() {
    let f = two_basins();
    let start = Instant::now();
    let mut wide = [0usize; 2];
    for seed in 0..50 {
        for (k, push) in [false, true].into_iter().enumerate() {
            let res = run(&f, &basin_config(push, seed)).unwrap();
            if f.basin_of(&res.x_a) == WIDE {
                wide[k] += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let base = wide[0] as f64 / 50.0;
    let dppf = wide[1] as f64 / 50.0;
    report(
        12,
        "push raises the fraction of runs ending in the wide basin",
        dppf - base >= 0.2 && secs < 30.0,
        &format!("wide-basin fraction {dppf:.2} with push vs {base:.2} without (need +0.20), lambda/alpha = 5 > narrow width 0.5, {secs:.2} s"),
    );
}

#[test]
fn criterion_13_loss_barrier_between_solutions() {
    let f = two_basins();
    let found = (0..50).find_map(|seed| {
        let base = run(&f, &basin_config(false, seed)).unwrap();
        let dppf = run(&f, &basin_config(true, seed)).unwrap();
        (f.basin_of(&base.x_a) != f.basin_of(&dppf.x_a)).then_some((seed, base.x_a, dppf.x_a))
    });
    let Some((seed, a, b)) = found else {
        report(13, "loss barrier between solutions in different basins", false, "no seed ended in different basins");
        return;
    };
    let curve = interpolation_scan(&a, &b, &f, 101).unwrap();
    let ends = (curve[0].eval.train_loss, curve[100].eval.train_loss);
    let (peak_at, peak) = curve[1..100]
        .iter()
        .map(|p| (p.alpha, p.eval.train_loss))
        .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    report(
        13,
        "loss barrier between solutions in different basins",
        peak > ends.0 && peak > ends.1,
        &format!("seed {seed}: endpoints {:.4} and {:.4}, interior peak {peak:.4} at alpha = {peak_at:.2}", ends.0, ends.1),
    );
}

const CONFIGS: [(&str, &str); 3] = [
    (
        "quadratic",
        r#"
[objective]
kind = "quadratic"
dim = 20
"#,
    ),
    (
        "multi-basin",
        r#"
[objective]
kind = "multi-basin"
basins = [
  { center = [-3.0, 0.0], width = 0.5, weight = 100.0 },
  { center = [3.0, 0.0], width = 1.5, weight = 1.0 },
]
"#,
    ),
    (
        "mlp",
        r#"
[objective]
kind = "mlp"
train_points = 200
test_points = 60
num_shards = 4
"#,
    ),
];

fn train_cli(config: &Path, out: &Path, threads: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_ppsim"))
        .args(["train", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string()])
        .status()
        .unwrap();
    assert!(status.success(), "train exited with {status}");
}

#[test]
fn criterion_14_train_output_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for (kind, objective) in CONFIGS {
        let text = format!(
            r#"
seed = 7
workers = 4
total_iters = 400

[pullpush]
alpha = 0.1
lambda = 0.2
tau = 4
push = "full-gradient"

[optimizer]
eta = 0.01
lr_schedule = "cosine"
momentum = 0.5

[noise]
sigma0 = 0.2
{objective}"#
        );
        let cfg = dir.path().join(format!("{kind}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let one = dir.path().join(format!("{kind}-1"));
        let many = dir.path().join(format!("{kind}-4"));
        train_cli(&cfg, &one, 1);
        train_cli(&cfg, &many, 4);
        let a = std::fs::read(one.join("metrics.csv")).unwrap();
        let b = std::fs::read(many.join("metrics.csv")).unwrap();
        let same = a == b && !a.is_empty();
        let snaps = std::fs::read(one.join("snapshots/x_a.ppsv")).unwrap()
            == std::fs::read(many.join("snapshots/x_a.ppsv")).unwrap();
        pass &= same && snaps;
        details.push(format!("{kind}: csv {} bytes identical={same}, snapshot identical={snaps}", a.len()));
    }
    report(14, "metrics CSV is byte-identical for 1 and 4 threads", pass, &details.join("; "));
}

#[test]
fn criterion_15_landscape_anchoring() {
    let mut rng = RngStream::new(15, ANALYSIS_STREAM);
    let q = QuadraticObjective::random(20, 0.5, 2.0, 0.3, &mut rng).unwrap();
    let pp = PullPushConfig::new(0.1, 0.05, 4).with_push(PushMode::Simplified);
    let cfg = TrainConfig::new(6, pp, LocalOptConfig::sgd(0.01), 400, 15).with_noise(NoiseModel::new(0.1).unwrap());
    let res = run(&q, &cfg).unwrap();
    let basis = svd_basis(&res.workers).unwrap();
    let ortho = (basis.dx.norm() - 1.0)
        .abs()
        .max((basis.dy.norm() - 1.0).abs())
        .max(basis.dx.dot(&basis.dy).abs());
    let grid = scan_grid(&q, &basis, 1.0, 0.1).unwrap();
    let origin = grid.node(0, 0).unwrap().eval.train_loss;
    let anchored = origin.to_bits() == q.value(&basis.x_a).unwrap().to_bits();

    let iso = QuadraticObjective::new(vec![1.3; 20], basis.x_a.to_vec(), 0.0).unwrap();
    let sym = scan_grid(&iso, &basis, 1.0, 0.1).unwrap();
    let h = (sym.side / 2) as i64;
    let mut asym: f64 = 0.0;
    for i in -h..=h {
        for j in -h..=h {
            let v = sym.node(i, j).unwrap().eval.train_loss;
            asym = asym
                .max((v - sym.node(j, i).unwrap().eval.train_loss).abs())
                .max((v - sym.node(-i, -j).unwrap().eval.train_loss).abs());
        }
    }
    report(
        15,
        "grid origin anchoring, basis orthonormality and isotropic symmetry",
        anchored && ortho < 1e-10 && asym < 1e-12 && grid.side == 21,
        &format!("origin bit-exact {anchored}, orthonormality error {ortho:.1e}, symmetry error {asym:.1e}, {0}x{0} grid", grid.side),
    );
}
