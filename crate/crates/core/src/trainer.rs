//! Data-parallel training with pull and push at communication rounds.
//!
//! Workers take local steps independently between barriers; the coordinator
//! then snapshots the average, computes the consensus variable and applies
//! pull and push to every worker in a fixed order. Worker randomness comes
//! from per-worker streams, so results do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::consensus::{
    compute_consensus, lambda_at, pull_update, push_gradients_full, qsr_period, CommPeriod, ConsensusState,
    PullPushConfig, PushMode,
};
use crate::error::{Error, Result};
use crate::exec::Pool;
use crate::objectives::{stoch_grad, NoiseModel, Objective, Split};
use crate::param::{mean_vectors, ParamVector};
use crate::rng::{RngStream, INIT_STREAM};
use crate::DEFAULT_EPS0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSchedule {
    Constant,
    /// `eta * (1 + cos(pi t / T)) / 2`.
    #[default]
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalOptConfig {
    pub eta: f64,
    #[serde(default)]
    pub lr_schedule: LrSchedule,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub weight_decay: f64,
    /// SAM neighborhood radius; `None` selects plain SGD.
    #[serde(default)]
    pub sam_rho: Option<f64>,
}

impl LocalOptConfig {
    pub fn sgd(eta: f64) -> Self {
        Self {
            eta,
            lr_schedule: LrSchedule::Constant,
            momentum: 0.0,
            weight_decay: 0.0,
            sam_rho: None,
        }
    }

    pub fn with_schedule(mut self, s: LrSchedule) -> Self {
        self.lr_schedule = s;
        self
    }

    pub fn with_sam(mut self, rho: f64) -> Self {
        self.sam_rho = Some(rho);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidConfig("weight_decay must be >= 0".into()));
        }
        if let Some(rho) = self.sam_rho {
            if !(rho >= 0.0) || !rho.is_finite() {
                return Err(Error::InvalidConfig(format!("sam_rho must be >= 0, got {rho}")));
            }
        }
        Ok(())
    }

    /// Learning rate at global iteration `t` of `total`.
    pub fn lr_at(&self, t: usize, total: usize) -> f64 {
        match self.lr_schedule {
            LrSchedule::Constant => self.eta,
            LrSchedule::Cosine => {
                let frac = if total == 0 { 0.0 } else { t as f64 / total as f64 };
                self.eta * 0.5 * (1.0 + (frac * PI).cos())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorkerState {
    pub id: usize,
    pub params: ParamVector,
    pub momentum_buf: ParamVector,
    pub local_step: usize,
    pub rng: RngStream,
    pub last_loss: f64,
    pub last_grad_norm: f64,
}

impl WorkerState {
    /// Worker `id` draws from stream `id` of `seed`.
    pub fn new(id: usize, params: ParamVector, seed: u64) -> Self {
        let dim = params.dim();
        Self {
            id,
            params,
            momentum_buf: ParamVector::zeros(dim),
            local_step: 0,
            rng: RngStream::new(seed, id as u64),
            last_loss: f64::NAN,
            last_grad_norm: f64::NAN,
        }
    }

    fn shard(&self, obj: &dyn Objective) -> usize {
        obj.num_shards().map_or(self.id, |n| self.id % n)
    }
}

fn apply_update(w: &mut WorkerState, g: &ParamVector, cfg: &LocalOptConfig, eta: f64) -> Result<()> {
    let mu = cfg.momentum;
    let wd = cfg.weight_decay;
    for ((b, gi), xi) in w.momentum_buf.iter_mut().zip(g.iter()).zip(w.params.iter()) {
        *b = mu * *b + gi + wd * xi;
    }
    for (xi, b) in w.params.iter_mut().zip(w.momentum_buf.iter()) {
        *xi -= eta * b;
    }
    w.local_step += 1;
    if !w.params.is_finite() {
        return Err(Error::NumericalOverflow(format!(
            "worker {} parameters after local step {}",
            w.id, w.local_step
        )));
    }
    Ok(())
}

fn record_loss(w: &mut WorkerState, loss: f64, g: &ParamVector) -> Result<()> {
    if !loss.is_finite() {
        return Err(Error::NumericalOverflow(format!("worker {} loss is {loss}", w.id)));
    }
    w.last_loss = loss;
    w.last_grad_norm = g.norm();
    Ok(())
}

/// One momentum-SGD step with learning rate `eta`:
/// `buf = momentum * buf + g + wd * x; x -= eta * buf`.
pub fn local_step_sgd(
    w: &mut WorkerState,
    obj: &dyn Objective,
    cfg: &LocalOptConfig,
    noise: &NoiseModel,
    eta: f64,
) -> Result<()> {
    let shard = w.shard(obj);
    let (loss, g) = stoch_grad(obj, &w.params, shard, &mut w.rng, noise)?;
    record_loss(w, loss, &g)?;
    apply_update(w, &g, cfg, eta)
}

/// One SAM step: ascend to `x + rho g1 / ||g1||`, take the gradient there and
/// apply it at `x`. A zero first gradient falls back to plain SGD.
pub fn local_step_sam(
    w: &mut WorkerState,
    obj: &dyn Objective,
    cfg: &LocalOptConfig,
    noise: &NoiseModel,
    eta: f64,
) -> Result<()> {
    let rho = cfg
        .sam_rho
        .ok_or_else(|| Error::InvalidConfig("SAM step without sam_rho".into()))?;
    let shard = w.shard(obj);
    let (loss, g1) = stoch_grad(obj, &w.params, shard, &mut w.rng, noise)?;
    record_loss(w, loss, &g1)?;
    let n1 = g1.norm();
    if n1 == 0.0 || rho == 0.0 {
        return apply_update(w, &g1, cfg, eta);
    }
    let mut ascended = w.params.clone();
    ascended.add_scaled(rho / n1, &g1);
    let (_, g2) = stoch_grad(obj, &ascended, shard, &mut w.rng, noise)?;
    apply_update(w, &g2, cfg, eta)
}

fn local_step(w: &mut WorkerState, obj: &dyn Objective, cfg: &LocalOptConfig, noise: &NoiseModel, eta: f64) -> Result<()> {
    if cfg.sam_rho.is_some() {
        local_step_sam(w, obj, cfg, noise, eta)
    } else {
        local_step_sgd(w, obj, cfg, noise, eta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub workers: usize,
    pub pp: PullPushConfig,
    pub opt: LocalOptConfig,
    pub noise: NoiseModel,
    pub total_iters: usize,
    pub seed: u64,
    pub threads: usize,
    /// Draw each worker's start independently instead of sharing one point.
    pub independent_init: bool,
    /// Replace every momentum buffer by the buffer average at each round.
    pub average_momentum: bool,
}

impl TrainConfig {
    pub fn new(workers: usize, pp: PullPushConfig, opt: LocalOptConfig, total_iters: usize, seed: u64) -> Self {
        Self {
            workers,
            pp,
            opt,
            noise: NoiseModel::none(),
            total_iters,
            seed,
            threads: 1,
            independent_init: false,
            average_momentum: false,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_independent_init(mut self, on: bool) -> Self {
        self.independent_init = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidConfig("need at least one worker".into()));
        }
        if self.total_iters == 0 {
            return Err(Error::InvalidConfig("total_iters must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be >= 1".into()));
        }
        if self.pp.push == PushMode::FullGradient && self.workers < 2 {
            return Err(Error::InvalidConfig("full-gradient push needs at least two workers".into()));
        }
        self.pp.validate()?;
        self.opt.validate()
    }
}

/// One communication round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Global iteration at the end of the round.
    pub iter: usize,
    /// Last minibatch loss per worker.
    pub losses: Vec<f64>,
    /// `(1/M) sum ||x_m - x_A||` after the round's updates.
    pub consensus_distance: f64,
    /// `alpha ||x_m - x_A||` per worker, on the pre-round snapshot.
    pub pull_mag: Vec<f64>,
    /// Length of the push applied to each worker.
    pub push_mag: Vec<f64>,
    pub lambda_t: f64,
    pub tau_t: usize,
    pub wall_time_s: f64,
}

impl RoundRecord {
    pub fn mean_loss(&self) -> f64 {
        self.losses.iter().sum::<f64>() / self.losses.len() as f64
    }

    pub fn mean_pull(&self) -> f64 {
        self.pull_mag.iter().sum::<f64>() / self.pull_mag.len() as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunMetrics {
    pub rounds: Vec<RoundRecord>,
}

impl RunMetrics {
    pub fn terminal_consensus_distance(&self) -> Option<f64> {
        self.rounds.last().map(|r| r.consensus_distance)
    }

    pub fn peak_consensus_distance(&self) -> Option<f64> {
        self.rounds.iter().map(|r| r.consensus_distance).reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalEval {
    pub worker_losses: Vec<f64>,
    pub average_loss: f64,
    pub average_test_loss: Option<f64>,
    pub average_train_err: Option<f64>,
    pub average_test_err: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub x_a: ParamVector,
    pub workers: Vec<ParamVector>,
    pub metrics: RunMetrics,
    pub terminal: TerminalEval,
    /// Communication rounds per local iteration.
    pub communication_volume: f64,
    pub config: TrainConfig,
}

/// A run that stopped early, with the rounds completed before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: RunMetrics,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} rounds)", self.error, self.partial.rounds.len())
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: RunMetrics::default(),
        }
    }
}

fn initial_workers(obj: &dyn Objective, cfg: &TrainConfig) -> Vec<ParamVector> {
    if cfg.independent_init {
        (0..cfg.workers)
            .map(|m| obj.initial_point(&mut RngStream::new(cfg.seed, INIT_STREAM + 1 + m as u64)))
            .collect()
    } else {
        let x0 = obj.initial_point(&mut RngStream::new(cfg.seed, INIT_STREAM));
        vec![x0; cfg.workers]
    }
}

fn mean_distance(workers: &[ParamVector], x_a: &ParamVector) -> f64 {
    workers.iter().map(|w| w.distance(x_a)).sum::<f64>() / workers.len() as f64
}

/// Runs data-parallel training for `cfg.total_iters` local iterations.
pub fn run(obj: &dyn Objective, cfg: &TrainConfig) -> Result<RunResult, RunFailure> {
    cfg.validate()?;
    let pool = Pool::new(cfg.threads);
    let mut workers: Vec<WorkerState> = initial_workers(obj, cfg)
        .into_iter()
        .enumerate()
        .map(|(m, x)| WorkerState::new(m, x, cfg.seed))
        .collect();
    for w in &workers {
        if w.params.dim() != obj.dim() {
            return Err(Error::DimensionMismatch {
                expected: obj.dim(),
                got: w.params.dim(),
            }
            .into());
        }
    }
    let snapshot: Vec<ParamVector> = workers.iter().map(|w| w.params.clone()).collect();
    let mut state = ConsensusState::new(cfg.pp.consensus, &snapshot)?;
    let mut metrics = RunMetrics::default();
    let total = cfg.total_iters;
    let started = Instant::now();
    let mut t = 0;
    let mut round = 0;
    while t < total {
        let tau = match cfg.pp.period {
            CommPeriod::Fixed(tau) => tau,
            CommPeriod::Qsr(q) => {
                let eta = cfg.opt.lr_at(t, total);
                match qsr_period(eta, q.tau_base, q.beta) {
                    Ok(tau) => tau,
                    // the cosine rate reaches zero only at t = T
                    Err(_) => q.tau_base,
                }
            }
        };
        let steps = tau.min(total - t);
        let t0 = t;
        let outcome = pool.map_mut(&mut workers, |_, w| -> Result<()> {
            for s in 0..steps {
                let eta = cfg.opt.lr_at(t0 + s, total);
                local_step(w, obj, &cfg.opt, &cfg.noise, eta)?;
            }
            Ok(())
        });
        if let Some(error) = outcome.into_iter().find_map(|r| r.err()) {
            return Err(RunFailure {
                error,
                partial: metrics,
            });
        }
        t += steps;
        round += 1;
        match communicate(obj, cfg, &mut workers, &mut state, round, t, tau) {
            Ok(mut rec) => {
                rec.wall_time_s = started.elapsed().as_secs_f64();
                metrics.rounds.push(rec);
            }
            Err(error) => {
                return Err(RunFailure {
                    error,
                    partial: metrics,
                })
            }
        }
    }
    let final_params: Vec<ParamVector> = workers.into_iter().map(|w| w.params).collect();
    let x_a = mean_vectors(&final_params)?;
    let terminal = evaluate_terminal(obj, &final_params, &x_a).map_err(|error| RunFailure {
        error,
        partial: metrics.clone(),
    })?;
    Ok(RunResult {
        x_a,
        workers: final_params,
        communication_volume: round as f64 / total as f64,
        metrics,
        terminal,
        config: cfg.clone(),
    })
}

fn communicate(
    _obj: &dyn Objective,
    cfg: &TrainConfig,
    workers: &mut [WorkerState],
    state: &mut ConsensusState,
    round: usize,
    t: usize,
    tau: usize,
) -> Result<RoundRecord> {
    let pp = &cfg.pp;
    let snapshot: Vec<ParamVector> = workers.iter().map(|w| w.params.clone()).collect();
    let losses: Vec<f64> = workers.iter().map(|w| w.last_loss).collect();
    let grad_norms: Vec<f64> = workers.iter().map(|w| w.last_grad_norm).collect();
    let x_a = mean_vectors(&snapshot)?;
    let x_c = compute_consensus(pp.consensus, &snapshot, &losses, &grad_norms, pp.alpha, state)?;
    let lambda_t = match pp.push {
        PushMode::Off => 0.0,
        _ => lambda_at(t, cfg.total_iters, pp.lambda, pp.lambda_schedule)?,
    };
    let pull_mag: Vec<f64> = snapshot.iter().map(|x| pp.alpha * x.distance(&x_a)).collect();
    let full = match pp.push {
        PushMode::FullGradient => Some(push_gradients_full(&snapshot, lambda_t * cfg.workers as f64, DEFAULT_EPS0)?),
        _ => None,
    };
    let mut push_mag = vec![0.0; workers.len()];
    for (m, w) in workers.iter_mut().enumerate() {
        let mut x = pull_update(&snapshot[m], &x_c, pp.alpha)?;
        match pp.push {
            PushMode::Off => {}
            PushMode::Simplified => {
                let gap = snapshot[m].sub(&x_a);
                let r = gap.norm();
                if r >= DEFAULT_EPS0 && lambda_t > 0.0 {
                    x.add_scaled(lambda_t / r, &gap);
                    push_mag[m] = lambda_t;
                }
            }
            PushMode::FullGradient => {
                let p = &full.as_ref().expect("computed above")[m];
                x.add_scaled(1.0, p);
                push_mag[m] = p.norm();
            }
        }
        if !x.is_finite() {
            return Err(Error::NumericalOverflow(format!("worker {m} after round {round}")));
        }
        w.params = x;
    }
    if cfg.average_momentum {
        let bufs: Vec<ParamVector> = workers.iter().map(|w| w.momentum_buf.clone()).collect();
        let avg = mean_vectors(&bufs)?;
        for w in workers.iter_mut() {
            w.momentum_buf = avg.clone();
        }
    }
    let after: Vec<ParamVector> = workers.iter().map(|w| w.params.clone()).collect();
    let consensus_distance = mean_distance(&after, &mean_vectors(&after)?);
    Ok(RoundRecord {
        round,
        iter: t,
        losses,
        consensus_distance,
        pull_mag,
        push_mag,
        lambda_t,
        tau_t: tau,
        wall_time_s: 0.0,
    })
}

fn evaluate_terminal(obj: &dyn Objective, workers: &[ParamVector], x_a: &ParamVector) -> Result<TerminalEval> {
    let worker_losses = workers.iter().map(|w| obj.value(w)).collect::<Result<Vec<_>>>()?;
    let (train_err, test_err) = match obj.classifier() {
        Some(mlp) => (
            Some(mlp.classification_error(x_a, Split::Train)?),
            Some(mlp.classification_error(x_a, Split::Test)?),
        ),
        None => (None, None),
    };
    Ok(TerminalEval {
        worker_losses,
        average_loss: obj.value(x_a)?,
        average_test_loss: obj.test_value(x_a)?,
        average_train_err: train_err,
        average_test_err: test_err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterplayRow {
    pub round: usize,
    pub iter: usize,
    pub pull: f64,
    pub push: f64,
    pub pull_dominates: bool,
}

/// Pull against push magnitude per round for one worker.
pub fn force_interplay_log(result: &RunResult, worker: usize) -> Result<Vec<InterplayRow>> {
    if result.config.pp.push == PushMode::Off {
        return Err(Error::invalid("force interplay needs a run with push enabled"));
    }
    if worker >= result.config.workers {
        return Err(Error::invalid(format!("worker index {worker} out of range")));
    }
    Ok(result
        .metrics
        .rounds
        .iter()
        .map(|r| InterplayRow {
            round: r.round,
            iter: r.iter,
            pull: r.pull_mag[worker],
            push: r.lambda_t,
            pull_dominates: r.pull_mag[worker] > r.lambda_t,
        })
        .collect())
}
