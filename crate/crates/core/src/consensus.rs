//! Consensus variables, the pull and push updates, and the `lambda` and
//! communication-period schedules.
//!
//! Within one communication round the worker average `x_A` is snapshotted
//! before any update; both pull and push are measured against that snapshot.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{mean_vectors, ParamVector};

/// MGRAWA regularizer in `1 / (||g|| + eps)`.
pub const MGRAWA_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsensusKind {
    /// Plain worker average.
    SimpleAvg,
    /// Elastic moving-average center.
    Easgd,
    /// Lowest-loss worker.
    Lsgd,
    /// Average weighted inversely by gradient norm.
    Mgrawa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PushMode {
    Off,
    /// Unit-normed push of length `lambda` along each worker's own gap.
    Simplified,
    /// Exact gradient of the valley regularizer, including the cross term.
    FullGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaSchedule {
    Fixed,
    CosineIncreasing,
    CosineDecreasing,
}

/// Quadratic synchronization rule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Qsr {
    pub tau_base: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommPeriod {
    Fixed(usize),
    Qsr(Qsr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullPushConfig {
    pub alpha: f64,
    /// Push strength after absorbing the worker count (`lambda_r / M`).
    pub lambda: f64,
    pub period: CommPeriod,
    pub consensus: ConsensusKind,
    pub push: PushMode,
    pub lambda_schedule: LambdaSchedule,
}

impl PullPushConfig {
    /// Plain average, fixed period, push off.
    pub fn new(alpha: f64, lambda: f64, tau: usize) -> Self {
        Self {
            alpha,
            lambda,
            period: CommPeriod::Fixed(tau),
            consensus: ConsensusKind::SimpleAvg,
            push: PushMode::Off,
            lambda_schedule: LambdaSchedule::Fixed,
        }
    }

    pub fn with_push(mut self, push: PushMode) -> Self {
        self.push = push;
        self
    }

    pub fn with_consensus(mut self, kind: ConsensusKind) -> Self {
        self.consensus = kind;
        self
    }

    pub fn with_lambda_schedule(mut self, s: LambdaSchedule) -> Self {
        self.lambda_schedule = s;
        self
    }

    pub fn with_qsr(mut self, qsr: Qsr) -> Self {
        self.period = CommPeriod::Qsr(qsr);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        match self.period {
            CommPeriod::Fixed(0) => return Err(Error::InvalidConfig("tau must be >= 1".into())),
            CommPeriod::Qsr(q) if q.tau_base == 0 || !(q.beta >= 0.0) => {
                return Err(Error::InvalidConfig("qsr needs tau_base >= 1 and beta >= 0".into()))
            }
            _ => {}
        }
        Ok(())
    }

    /// Combinations that are allowed but known to misbehave.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.push != PushMode::Off && self.consensus == ConsensusKind::Lsgd {
            w.push(
                "push with an LSGD leader pulls toward the leader but pushes away from the average; \
                 this combination is known not to converge"
                    .to_string(),
            );
        }
        w
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConsensusState {
    pub easgd_center: Option<ParamVector>,
    pub round_index: usize,
}

impl ConsensusState {
    /// The EASGD center starts at the initial worker average.
    pub fn new(kind: ConsensusKind, workers: &[ParamVector]) -> Result<Self> {
        let easgd_center = match kind {
            ConsensusKind::Easgd => Some(mean_vectors(workers)?),
            _ => None,
        };
        Ok(Self {
            easgd_center,
            round_index: 0,
        })
    }
}

/// Computes the consensus variable `x_C` for one round.
///
/// `losses` and `grad_norms` are indexed like `workers`. LSGD ties go to the
/// lowest index. For EASGD the stored center is advanced by
/// `z += alpha * mean(x_m - z)` and returned.
pub fn compute_consensus(
    kind: ConsensusKind,
    workers: &[ParamVector],
    losses: &[f64],
    grad_norms: &[f64],
    alpha: f64,
    state: &mut ConsensusState,
) -> Result<ParamVector> {
    if workers.is_empty() {
        return Err(Error::EmptyInput("worker list"));
    }
    state.round_index += 1;
    match kind {
        ConsensusKind::SimpleAvg => mean_vectors(workers),
        ConsensusKind::Lsgd => {
            if losses.len() != workers.len() {
                return Err(Error::DimensionMismatch {
                    expected: workers.len(),
                    got: losses.len(),
                });
            }
            let mut best = 0;
            for (m, l) in losses.iter().enumerate() {
                if *l < losses[best] {
                    best = m;
                }
            }
            Ok(workers[best].clone())
        }
        ConsensusKind::Mgrawa => {
            if grad_norms.len() != workers.len() {
                return Err(Error::DimensionMismatch {
                    expected: workers.len(),
                    got: grad_norms.len(),
                });
            }
            let raw: Vec<f64> = grad_norms.iter().map(|g| 1.0 / (g + MGRAWA_EPS)).collect();
            let total: f64 = raw.iter().sum();
            let mut out = ParamVector::zeros(workers[0].dim());
            for (w, x) in raw.iter().zip(workers) {
                out.check_dim(x)?;
                out.add_scaled(w / total, x);
            }
            Ok(out)
        }
        ConsensusKind::Easgd => {
            let avg = mean_vectors(workers)?;
            let center = state.easgd_center.get_or_insert_with(|| avg.clone());
            center.check_dim(&avg)?;
            // mean(x_m - z) = x_A - z
            let drift = avg.sub(center);
            center.add_scaled(alpha, &drift);
            Ok(center.clone())
        }
    }
}

/// `(1 - alpha) x_m + alpha x_C`.
pub fn pull_update(x_m: &ParamVector, x_c: &ParamVector, alpha: f64) -> Result<ParamVector> {
    x_m.check_dim(x_c)?;
    let keep = 1.0 - alpha;
    Ok(ParamVector::from(
        x_m.iter().zip(x_c.iter()).map(|(a, c)| keep * a + alpha * c).collect::<Vec<_>>(),
    ))
}

/// Moves `x_m` a distance `lambda` further from `x_a` along its gap. A gap
/// shorter than `eps0` has no direction and the push is skipped.
pub fn push_update_simplified(x_m: &ParamVector, x_a: &ParamVector, lambda: f64, eps0: f64) -> Result<ParamVector> {
    x_m.check_dim(x_a)?;
    let gap = x_m.sub(x_a);
    let r = gap.norm();
    let mut out = x_m.clone();
    if r >= eps0 {
        out.add_scaled(lambda / r, &gap);
    }
    Ok(out)
}

fn unit_gaps(workers: &[ParamVector], eps0: f64) -> Result<(ParamVector, Vec<ParamVector>)> {
    let x_a = mean_vectors(workers)?;
    let units = workers
        .iter()
        .map(|x| {
            let d = x.sub(&x_a);
            let r = d.norm();
            if r < eps0 {
                ParamVector::zeros(d.dim())
            } else {
                d.scaled(1.0 / r)
            }
        })
        .collect();
    Ok((x_a, units))
}

/// Exact push for every worker: `(lambda_r / M^2) (M u_m - sum_j u_j)`,
/// i.e. `-lambda_r` times the gradient of `R = -(1/M) sum_i ||x_i - x_A||`.
pub fn push_gradients_full(workers: &[ParamVector], lambda_r: f64, eps0: f64) -> Result<Vec<ParamVector>> {
    let m = workers.len();
    if m < 2 {
        return Err(Error::invalid("full-gradient push needs at least two workers"));
    }
    let (_, units) = unit_gaps(workers, eps0)?;
    let mut sum = ParamVector::zeros(workers[0].dim());
    for u in &units {
        sum.add_scaled(1.0, u);
    }
    let mf = m as f64;
    let scale = lambda_r / (mf * mf);
    Ok(units
        .iter()
        .map(|u| {
            ParamVector::from(
                u.iter().zip(sum.iter()).map(|(ui, si)| scale * (mf * ui - si)).collect::<Vec<_>>(),
            )
        })
        .collect())
}

pub fn push_gradient_full(workers: &[ParamVector], m: usize, lambda_r: f64, eps0: f64) -> Result<ParamVector> {
    if m >= workers.len() {
        return Err(Error::invalid(format!("worker index {m} out of range")));
    }
    Ok(push_gradients_full(workers, lambda_r, eps0)?.swap_remove(m))
}

/// The two terms of the regularizer gradient for worker `m`:
/// `T1 = -(lambda/M) u_m` (own direction) and `T2 = (lambda/M^2) sum_j u_j`
/// (cross term). `T1 + T2 = lambda * dR/dx_m`.
pub fn decompose_push_terms(
    workers: &[ParamVector],
    m: usize,
    lambda: f64,
    eps0: f64,
) -> Result<(ParamVector, ParamVector)> {
    let count = workers.len();
    if count < 2 {
        return Err(Error::invalid("push decomposition needs at least two workers"));
    }
    if m >= count {
        return Err(Error::invalid(format!("worker index {m} out of range")));
    }
    let (_, units) = unit_gaps(workers, eps0)?;
    let mf = count as f64;
    let t1 = units[m].scaled(-lambda / mf);
    let mut t2 = ParamVector::zeros(workers[0].dim());
    for u in &units {
        t2.add_scaled(1.0, u);
    }
    Ok((t1, t2.scaled(lambda / (mf * mf))))
}

/// Pull and simplified push in one step:
/// `x_m + (x_A - x_m) (alpha - lambda / ||x_m - x_A||)`.
pub fn combined_update(x_m: &ParamVector, x_a: &ParamVector, alpha: f64, lambda: f64, eps0: f64) -> Result<ParamVector> {
    x_m.check_dim(x_a)?;
    let gap = x_a.sub(x_m);
    let r = gap.norm();
    let coef = if r < eps0 { alpha } else { alpha - lambda / r };
    let mut out = x_m.clone();
    out.add_scaled(coef, &gap);
    Ok(out)
}

/// Push strength at global iteration `t` of `total`.
pub fn lambda_at(t: usize, total: usize, lambda_max: f64, schedule: LambdaSchedule) -> Result<f64> {
    if t > total {
        return Err(Error::invalid(format!("t = {t} exceeds T = {total}")));
    }
    if schedule == LambdaSchedule::Fixed {
        return Ok(lambda_max);
    }
    if total == 0 {
        return Err(Error::invalid("cosine lambda schedule needs T >= 1"));
    }
    let c = (t as f64 / total as f64 * PI).cos();
    let v = match schedule {
        LambdaSchedule::CosineIncreasing => 0.5 * lambda_max * (1.0 - c),
        LambdaSchedule::CosineDecreasing => 0.5 * lambda_max * (1.0 + c),
        LambdaSchedule::Fixed => unreachable!(),
    };
    Ok(v.clamp(0.0, lambda_max))
}

/// `max(tau_base, floor((beta / eta_t)^2))`.
pub fn qsr_period(eta_t: f64, tau_base: usize, beta: f64) -> Result<usize> {
    if !(eta_t > 0.0) {
        return Err(Error::invalid(format!("learning rate must be positive, got {eta_t}")));
    }
    let raw = (beta / eta_t).powi(2).floor();
    // float-to-int casts saturate
    Ok(tau_base.max(raw as usize))
}
