//! `ppsim`: train, measure, scan and check pull-push data-parallel runs.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration or input error,
//! 3 numerical abort.

mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ppsim_core::io::{
    read_snapshot, write_dataset_csv, write_grid_csv, write_interpolation_csv, write_metrics_csv,
    write_projections_csv, write_snapshot, RunSummary, SnapshotMeta, SNAPSHOT_VERSION,
};
use ppsim_core::landscape::{interpolation_scan, project_workers, scan_grid, svd_basis};
use ppsim_core::measures::{
    epsilon_sharpness, fisher_rao, hessian_lambda_max, hessian_trace, inverse_mean_valley, lpf_measure,
    MeasureResult, SharpnessBox, ValleyParams,
};
use ppsim_core::objectives::{Objective, Split};
use ppsim_core::param::ParamVector;
use ppsim_core::rng::{RngStream, MEASURE_STREAM};
use ppsim_core::theory::{
    circle_spread, equally_spaced_angles, gap_closed_form, gap_recurrence, geometric_grid, mean_unit_vector_check,
    nonconvex_bound_rhs, pac_bayes_gap, valley_width_limit, GapRecurrenceConfig, NonconvexParams, PacBayesParams,
    RecurrenceMode,
};
use ppsim_core::trainer;
use ppsim_core::Error as CoreError;

use crate::config::{load_config, ExperimentConfig};

const THREADS_ENV: &str = "PPSIM_THREADS";

#[derive(Parser)]
#[command(name = "ppsim", version, about = "Pull-push consensus simulator for local-SGD data-parallel training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run training and write metrics, summary and snapshots.
    Train(TrainArgs),
    /// Evaluate flatness measures on a finished run.
    Measure(MeasureArgs),
    /// Scan the loss on the plane of a run's workers.
    Landscape(LandscapeArgs),
    /// Evaluate a theoretical check and print it as JSON.
    Theory {
        #[command(subcommand)]
        check: TheoryCheck,
    },
    /// Write the classifier dataset of a config as CSV.
    DatasetDump(DumpArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set pullpush.lambda=0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureName {
    InvMv,
    EpsSharpness,
    Lpf,
    FisherRao,
    HessianTrace,
    LambdaMax,
}

#[derive(Args)]
struct MeasureArgs {
    /// Directory written by `train`.
    #[arg(long)]
    run: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    measures: Vec<MeasureName>,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Skip per-layer normalization even when the snapshots carry a layout.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Per-coordinate box `eps (|x_i| + 1)` for epsilon-sharpness.
    #[arg(long)]
    relative_box: bool,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 100)]
    n_mc: usize,
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the records to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    limit: f64,
    #[arg(long)]
    step: f64,
    /// Defaults to `<run>/landscape`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Second run directory; adds an interpolation scan between the two averages.
    #[arg(long)]
    interpolate: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Subcommand)]
enum TheoryCheck {
    /// Iterate the consensus-gap recurrence.
    GapRecurrence {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        k: usize,
        /// Add the noise and finite-worker envelope terms.
        #[arg(long)]
        stochastic: bool,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma0: f64,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Limiting valley width `lambda / alpha`.
    ValleyWidth {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// Generalization-gap term over a geometric radius grid.
    PacBayes {
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        d0: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma0: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Spread of points on a circle: equally spaced against random placements.
    Circle {
        #[arg(long)]
        workers: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Right-hand side of the non-convex convergence bound.
    Nonconvex {
        #[arg(long)]
        f0_minus_fstar: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        iters: f64,
        #[arg(long)]
        smoothness: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Monte Carlo norm of the mean of random unit vectors.
    UnitMean {
        #[arg(long)]
        workers: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "train")]
    split: SplitArg,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes, one per exit code.
enum Failure {
    Input(anyhow::Error),
    Numerical(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Numerical(e) | Failure::Other(e) => e,
        }
    }
}

/// Classifies a library error by its kind.
fn core_failure(e: CoreError, context: &str) -> Failure {
    let numerical = matches!(e, CoreError::NumericalOverflow(_));
    let other = matches!(e, CoreError::Snapshot(_));
    let err = anyhow::Error::new(e).context(context.to_string());
    if numerical {
        Failure::Numerical(err)
    } else if other {
        Failure::Other(err)
    } else {
        Failure::Input(err)
    }
}

fn other(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Other(e.into())
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Landscape(a) => cmd_landscape(a),
        Command::Theory { check } => cmd_theory(check),
        Command::DatasetDump(a) => cmd_dataset_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn resolve_threads(flag: Option<usize>, cfg: &ExperimentConfig) -> Result<usize, Failure> {
    if let Some(t) = flag.or(cfg.threads) {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(anyhow!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(1),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(Failure::Other)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(other)?;
    writeln!(w).map_err(other)?;
    w.flush().map_err(other)
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let mut cfg = load_config(&args.config, &args.overrides).map_err(Failure::Input)?;
    let threads = resolve_threads(args.threads, &cfg)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Failure::Input(anyhow!("no output directory: pass --out or set output_dir")))?;
    let obj = cfg.objective.build().map_err(|e| core_failure(e, "cannot build objective"))?;
    let train_cfg = cfg.train_config(threads);
    train_cfg.validate().map_err(|e| core_failure(e, "invalid training config"))?;
    for w in train_cfg.pp.warnings() {
        log::warn!("{w}");
    }
    cfg.threads = Some(threads);
    fs::create_dir_all(out.join("snapshots"))
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(Failure::Other)?;
    fs::write(out.join("config.toml"), toml::to_string(&cfg).map_err(other)?).map_err(other)?;

    let result = match trainer::run(obj.as_ref(), &train_cfg) {
        Ok(r) => r,
        Err(failure) => {
            let mut w = create(&out.join("metrics.csv"))?;
            write_metrics_csv(&mut w, &failure.partial).map_err(|e| core_failure(e, "metrics"))?;
            w.flush().map_err(other)?;
            return Err(core_failure(failure.error, "training aborted"));
        }
    };
    let mut w = create(&out.join("metrics.csv"))?;
    write_metrics_csv(&mut w, &result.metrics).map_err(|e| core_failure(e, "metrics"))?;
    w.flush().map_err(other)?;
    let echo = serde_json::to_value(&cfg).map_err(other)?;
    write_json(&out.join("summary.json"), &RunSummary::new(&result, echo))?;

    let layout = obj.layout();
    let meta = |worker_id| SnapshotMeta {
        version: SNAPSHOT_VERSION,
        dim: obj.dim(),
        objective: obj.kind().to_string(),
        worker_id,
        layout: layout.clone(),
    };
    let snaps = out.join("snapshots");
    write_snapshot(&snaps.join("x_a.ppsv"), &result.x_a, &meta(None)).map_err(|e| core_failure(e, "snapshot"))?;
    for (m, x) in result.workers.iter().enumerate() {
        write_snapshot(&snaps.join(format!("worker_{m}.ppsv")), x, &meta(Some(m)))
            .map_err(|e| core_failure(e, "snapshot"))?;
    }
    log::info!(
        "{} rounds, terminal consensus distance {:?}",
        result.metrics.rounds.len(),
        result.metrics.terminal_consensus_distance()
    );
    Ok(())
}

/// A finished run: its config, objective and worker snapshots.
struct LoadedRun {
    objective: Box<dyn Objective>,
    workers: Vec<ParamVector>,
    layout: Option<ppsim_core::measures::LayerLayout>,
    x_a: ParamVector,
}

fn load_run(dir: &Path) -> Result<LoadedRun, Failure> {
    let cfg = load_config(&dir.join("config.toml"), &[]).map_err(Failure::Input)?;
    let objective = cfg.objective.build().map_err(|e| core_failure(e, "cannot build objective"))?;
    let snaps = dir.join("snapshots");
    let mut indexed = Vec::new();
    let entries = fs::read_dir(&snaps)
        .with_context(|| format!("cannot list {}", snaps.display()))
        .map_err(Failure::Input)?;
    for entry in entries {
        let name = entry.map_err(other)?.file_name().to_string_lossy().into_owned();
        if let Some(idx) = name.strip_prefix("worker_").and_then(|s| s.strip_suffix(".ppsv")) {
            if let Ok(m) = idx.parse::<usize>() {
                indexed.push(m);
            }
        }
    }
    indexed.sort_unstable();
    if indexed.is_empty() {
        return Err(Failure::Input(anyhow!("no worker snapshots in {}", snaps.display())));
    }
    let mut workers = Vec::with_capacity(indexed.len());
    let mut layout = None;
    for m in indexed {
        let (x, meta) = read_snapshot(&snaps.join(format!("worker_{m}.ppsv"))).map_err(|e| core_failure(e, "snapshot"))?;
        if x.dim() != objective.dim() {
            return Err(Failure::Input(anyhow!(
                "snapshot worker_{m} has dim {} but the objective has dim {}",
                x.dim(),
                objective.dim()
            )));
        }
        if let Some(meta) = meta {
            layout = layout.or(meta.layout);
        }
        workers.push(x);
    }
    let x_a = ppsim_core::param::mean_vectors(&workers).map_err(|e| core_failure(e, "average"))?;
    Ok(LoadedRun {
        objective,
        workers,
        layout,
        x_a,
    })
}

fn cmd_measure(args: MeasureArgs) -> CmdResult {
    let run = load_run(&args.run)?;
    let obj = run.objective.as_ref();
    let mut rng = RngStream::new(args.seed, MEASURE_STREAM);
    let mut records = Vec::new();
    for name in &args.measures {
        let rec = match name {
            MeasureName::InvMv => {
                let p = ValleyParams {
                    kappa: args.kappa,
                    step: args.step,
                    max_steps: args.max_steps,
                };
                let layout = if args.no_normalize { None } else { run.layout.as_ref() };
                inverse_mean_valley(&run.workers, obj, &p, layout)
            }
            MeasureName::EpsSharpness => {
                let shape = if args.relative_box {
                    SharpnessBox::Relative
                } else {
                    SharpnessBox::Uniform
                };
                epsilon_sharpness(&run.x_a, obj, args.eps, shape).map(|v| {
                    point_record("eps_sharpness", v, &[("eps", args.eps), ("relative_box", args.relative_box as u8 as f64)])
                })
            }
            MeasureName::Lpf => lpf_measure(&run.x_a, obj, args.sigma, args.n_mc, &mut rng)
                .map(|v| point_record("lpf", v, &[("sigma", args.sigma), ("n_mc", args.n_mc as f64)])),
            MeasureName::FisherRao => fisher_rao(&run.x_a, obj).map(|v| point_record("fisher_rao", v, &[])),
            MeasureName::HessianTrace => hessian_trace(&run.x_a, obj, args.probes, &mut rng)
                .map(|v| point_record("hessian_trace", v, &[("probes", args.probes as f64)])),
            MeasureName::LambdaMax => hessian_lambda_max(&run.x_a, obj, args.iters, args.tol, &mut rng).map(|p| {
                point_record(
                    "lambda_max",
                    p.value,
                    &[
                        ("iters", args.iters as f64),
                        ("tol", args.tol),
                        ("converged", p.converged as u8 as f64),
                        ("iterations", p.iterations as f64),
                    ],
                )
            }),
        }
        .map_err(|e| core_failure(e, "measure failed"))?;
        records.push(rec);
    }
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r).map_err(other)?);
        text.push('\n');
    }
    io::stdout().write_all(text.as_bytes()).map_err(other)?;
    if let Some(path) = args.out {
        fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Other)?;
    }
    Ok(())
}

fn point_record(name: &str, value: f64, params: &[(&str, f64)]) -> MeasureResult {
    MeasureResult {
        name: name.to_string(),
        value,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        per_direction_betas: None,
    }
}

fn cmd_landscape(args: LandscapeArgs) -> CmdResult {
    let run = load_run(&args.run)?;
    let obj = run.objective.as_ref();
    let out = args.out.clone().unwrap_or_else(|| args.run.join("landscape"));
    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(Failure::Other)?;
    let basis = svd_basis(&run.workers).map_err(|e| core_failure(e, "basis"))?;
    let grid = scan_grid(obj, &basis, args.limit, args.step).map_err(|e| core_failure(e, "grid scan"))?;
    let mut w = create(&out.join("grid.csv"))?;
    write_grid_csv(&mut w, &grid).map_err(|e| core_failure(e, "grid"))?;
    w.flush().map_err(other)?;
    let proj = project_workers(&run.workers, &basis).map_err(|e| core_failure(e, "projection"))?;
    let mut w = create(&out.join("projections.csv"))?;
    write_projections_csv(&mut w, &proj).map_err(|e| core_failure(e, "projections"))?;
    w.flush().map_err(other)?;
    if let Some(other_dir) = &args.interpolate {
        let b = load_run(other_dir)?;
        let curve =
            interpolation_scan(&run.x_a, &b.x_a, obj, args.points).map_err(|e| core_failure(e, "interpolation"))?;
        let mut w = create(&out.join("interpolation.csv"))?;
        write_interpolation_csv(&mut w, &curve).map_err(|e| core_failure(e, "interpolation"))?;
        w.flush().map_err(other)?;
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    println!("{}", serde_json::to_string(value).map_err(other)?);
    Ok(())
}

#[derive(Serialize)]
struct GapReport {
    k: usize,
    r_k: f64,
    closed_form: f64,
    limit: f64,
}

#[derive(Serialize)]
struct PacReport {
    grid: Vec<f64>,
    gaps: Vec<f64>,
    strictly_decreasing: bool,
}

#[derive(Serialize)]
struct CircleReport {
    workers: usize,
    radius: f64,
    equally_spaced: f64,
    max_random: f64,
    max_identity_error: f64,
    bound: f64,
}

fn cmd_theory(check: TheoryCheck) -> CmdResult {
    let fail = |e| core_failure(e, "invalid parameters");
    match check {
        TheoryCheck::GapRecurrence {
            alpha,
            lambda,
            k,
            stochastic,
            eta,
            sigma0,
            tau,
            workers,
        } => {
            let cfg = GapRecurrenceConfig {
                alpha,
                lambda,
                eta,
                sigma0,
                tau,
                workers,
                rounds: k,
                mode: if stochastic {
                    RecurrenceMode::Stochastic
                } else {
                    RecurrenceMode::Deterministic
                },
            };
            let r = gap_recurrence(&cfg).map_err(fail)?;
            print_json(&GapReport {
                k,
                r_k: r[k],
                closed_form: gap_closed_form(&cfg, k).map_err(fail)?,
                limit: cfg.limit(),
            })
        }
        TheoryCheck::ValleyWidth { alpha, lambda } => {
            print_json(&serde_json::json!({ "width": valley_width_limit(alpha, lambda).map_err(fail)? }))
        }
        TheoryCheck::PacBayes {
            r_min,
            r_max,
            gamma,
            d,
            c,
            d0,
            beta,
            sigma0,
            n,
            delta,
        } => {
            let grid = geometric_grid(r_min, r_max, gamma).map_err(fail)?;
            let p = PacBayesParams {
                d,
                c,
                d0,
                beta,
                sigma0,
                n,
                delta,
                j: grid.len(),
            };
            let gaps = grid.iter().map(|r| pac_bayes_gap(*r, &p)).collect::<Result<Vec<_>, _>>().map_err(fail)?;
            let strictly_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
            print_json(&PacReport {
                grid,
                gaps,
                strictly_decreasing,
            })
        }
        TheoryCheck::Circle {
            workers,
            radius,
            trials,
            seed,
        } => {
            let even = circle_spread(&equally_spaced_angles(workers, 0.0), radius).map_err(fail)?;
            let mut rng = RngStream::new(seed, ppsim_core::rng::ANALYSIS_STREAM);
            let mut max_random = f64::NEG_INFINITY;
            let mut max_err: f64 = (even.direct - even.identity).abs();
            for _ in 0..trials {
                let angles: Vec<f64> = (0..workers).map(|_| rng.uniform_range(0.0, std::f64::consts::TAU)).collect();
                let s = circle_spread(&angles, radius).map_err(fail)?;
                max_random = max_random.max(s.direct);
                max_err = max_err.max((s.direct - s.identity).abs());
            }
            print_json(&CircleReport {
                workers,
                radius,
                equally_spaced: even.direct,
                max_random,
                max_identity_error: max_err,
                bound: workers as f64 * radius * radius,
            })
        }
        TheoryCheck::Nonconvex {
            f0_minus_fstar,
            eta,
            iters,
            smoothness,
            alpha,
            lambda,
            delta,
            sigma,
        } => print_json(
            &nonconvex_bound_rhs(&NonconvexParams {
                f0_minus_fstar,
                eta,
                iters,
                smoothness,
                alpha,
                lambda,
                delta,
                sigma,
            })
            .map_err(fail)?,
        ),
        TheoryCheck::UnitMean {
            workers,
            dim,
            trials,
            seed,
        } => {
            let mut rng = RngStream::new(seed, ppsim_core::rng::ANALYSIS_STREAM);
            print_json(&mean_unit_vector_check(workers, dim, trials, &mut rng).map_err(fail)?)
        }
    }
}

fn cmd_dataset_dump(args: DumpArgs) -> CmdResult {
    let cfg = load_config(&args.config, &args.overrides).map_err(Failure::Input)?;
    let obj = cfg.objective.build().map_err(|e| core_failure(e, "cannot build objective"))?;
    let mlp = obj
        .classifier()
        .ok_or_else(|| core_failure(CoreError::NotClassifier, "dataset-dump needs an mlp objective"))?;
    let (data, shards) = match args.split {
        SplitArg::Train => (mlp.dataset(Split::Train), mlp.shard_assignment()),
        SplitArg::Test => {
            let d = mlp.dataset(Split::Test);
            (d, vec![None; d.len()])
        }
    };
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_dataset_csv(&mut w, data, &shards).map_err(|e| core_failure(e, "dataset"))?;
            w.flush().map_err(other)
        }
        None => write_dataset_csv(io::stdout().lock(), data, &shards).map_err(|e| core_failure(e, "dataset")),
    }
}
