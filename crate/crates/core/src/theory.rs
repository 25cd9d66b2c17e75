//! Numerical forms of the valley-width results: the gap recurrence and its
//! limit, the PAC-Bayes gap term over a geometric radius grid, the circle
//! arrangement identity, the non-convex convergence bound, and the
//! mean-unit-vector bound.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::consensus::{CommPeriod, PushMode};
use crate::error::{Error, Result};
use crate::param::sample_unit_sphere;
use crate::rng::RngStream;
use crate::trainer::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceMode {
    /// `r_{k+1} = (1 - alpha) r_k + lambda`.
    Deterministic,
    /// Adds the noise and finite-`M` envelope terms.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapRecurrenceConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub eta: f64,
    pub sigma0: f64,
    pub tau: usize,
    pub workers: usize,
    pub rounds: usize,
    pub mode: RecurrenceMode,
}

impl GapRecurrenceConfig {
    pub fn deterministic(alpha: f64, lambda: f64, rounds: usize) -> Self {
        Self {
            alpha,
            lambda,
            eta: 0.0,
            sigma0: 0.0,
            tau: 1,
            workers: 1,
            rounds,
            mode: RecurrenceMode::Deterministic,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0) || self.rounds == 0 {
            return Err(Error::invalid("need lambda >= 0 and at least one round"));
        }
        if self.mode == RecurrenceMode::Stochastic && (self.workers == 0 || !(self.eta >= 0.0) || !(self.sigma0 >= 0.0)) {
            return Err(Error::invalid("stochastic recurrence needs M >= 1, eta >= 0, sigma0 >= 0"));
        }
        Ok(())
    }

    /// Per-round additive term: `lambda`, or `beta_hat + gamma` in stochastic mode.
    pub fn increment(&self) -> f64 {
        match self.mode {
            RecurrenceMode::Deterministic => self.lambda,
            RecurrenceMode::Stochastic => {
                noise_envelope(self.alpha, self.eta, self.tau, self.sigma0, self.workers)
                    + self.lambda * (1.0 + 1.0 / (self.workers as f64).sqrt())
            }
        }
    }

    /// Fixed point `increment / alpha`.
    pub fn limit(&self) -> f64 {
        self.increment() / self.alpha
    }
}

/// `eta (1 - alpha) sqrt(tau) sigma0 sqrt((M + 1) / M)`.
fn noise_envelope(alpha: f64, eta: f64, tau: usize, sigma0: f64, workers: usize) -> f64 {
    let m = workers as f64;
    eta * (1.0 - alpha) * (tau as f64).sqrt() * sigma0 * ((m + 1.0) / m).sqrt()
}

/// Iterates `r_0 = 0, ..., r_K`.
pub fn gap_recurrence(cfg: &GapRecurrenceConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let c = 1.0 - cfg.alpha;
    let inc = cfg.increment();
    let mut out = Vec::with_capacity(cfg.rounds + 1);
    let mut r = 0.0;
    out.push(r);
    for _ in 0..cfg.rounds {
        r = c * r + inc;
        out.push(r);
    }
    Ok(out)
}

/// `(increment / alpha) (1 - (1 - alpha)^k)`.
pub fn gap_closed_form(cfg: &GapRecurrenceConfig, k: usize) -> Result<f64> {
    cfg.validate()?;
    let k = i32::try_from(k).map_err(|_| Error::invalid("k too large"))?;
    Ok(cfg.limit() * (1.0 - (1.0 - cfg.alpha).powi(k)))
}

/// Limiting valley width `lambda / alpha`.
pub fn valley_width_limit(alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid("lambda must be >= 0"));
    }
    Ok(lambda / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacBayesParams {
    pub d: usize,
    /// Data-dependent constant; a user input.
    pub c: f64,
    pub d0: f64,
    pub beta: f64,
    pub sigma0: f64,
    pub n: usize,
    pub delta: f64,
    /// Grid size.
    pub j: usize,
}

impl PacBayesParams {
    fn validate(&self) -> Result<()> {
        let ok = self.d >= 1
            && self.c >= 1.0
            && self.d0 > 0.0
            && (0.0..1.0).contains(&self.beta)
            && self.sigma0 > 0.0
            && self.n >= 2
            && self.delta > 0.0
            && self.delta < 1.0
            && self.j >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid PAC-Bayes parameters {self:?}")))
        }
    }
}

/// Generalization gap bound at radius `r`:
/// `sqrt((d/2 (c - 1 - ln c) + D0 / (2 sigma0^2 r^(1-beta)) + ln(n J / delta)) / (2 (n - 1)))`.
pub fn pac_bayes_gap(r: f64, p: &PacBayesParams) -> Result<f64> {
    p.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be > 0, got {r}")));
    }
    let kl_shape = if p.c == 1.0 { 0.0 } else { p.d as f64 / 2.0 * (p.c - 1.0 - p.c.ln()) };
    let kl_mean = p.d0 / (2.0 * p.sigma0 * p.sigma0 * r.powf(1.0 - p.beta));
    let conf = (p.n as f64 * p.j as f64 / p.delta).ln();
    Ok(((kl_shape + kl_mean + conf) / (2.0 * (p.n as f64 - 1.0))).sqrt())
}

/// `r_j = r_min (1 + gamma)^j` for `j = 0..=J`, `J = ceil(log_{1+gamma}(r_max / r_min))`.
pub fn geometric_grid(r_min: f64, r_max: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
        return Err(Error::invalid(format!("need 0 < r_min <= r_max, got [{r_min}, {r_max}]")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("gamma must be > 0"));
    }
    let base = 1.0 + gamma;
    let raw = (r_max / r_min).ln() / base.ln();
    let mut j = raw.ceil().max(0.0) as usize;
    // undo a ceil pushed up by rounding, e.g. log2(8) = 3.0000000000000004
    while j > 0 && r_min * base.powi(j as i32 - 1) >= r_max * (1.0 - 1e-12) {
        j -= 1;
    }
    Ok((0..=j).map(|k| r_min * base.powi(k as i32)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleSpread {
    /// `sum_i ||P_i - P_A||^2` computed from the points.
    pub direct: f64,
    /// `M C^2 - M (x_bar^2 + y_bar^2)`.
    pub identity: f64,
}

/// Spread of `M` points on a circle of radius `c` around their average.
pub fn circle_spread(angles: &[f64], c: f64) -> Result<CircleSpread> {
    if angles.is_empty() {
        return Err(Error::EmptyInput("angles"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("radius must be > 0"));
    }
    let m = angles.len() as f64;
    let pts: Vec<(f64, f64)> = angles.iter().map(|a| (c * a.cos(), c * a.sin())).collect();
    let xb = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let yb = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let direct = pts.iter().map(|p| (p.0 - xb).powi(2) + (p.1 - yb).powi(2)).sum();
    Ok(CircleSpread {
        direct,
        identity: m * c * c - m * (xb * xb + yb * yb),
    })
}

/// `M` angles spaced `2 pi / M` apart starting at `phase`.
pub fn equally_spaced_angles(m: usize, phase: f64) -> Vec<f64> {
    (0..m).map(|i| phase + TAU * i as f64 / m as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonconvexBound {
    pub value: f64,
    /// Whether `1 - alpha - lambda - 3 L eta > 0`.
    pub side_condition_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonconvexParams {
    pub f0_minus_fstar: f64,
    pub eta: f64,
    pub iters: f64,
    pub smoothness: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    pub sigma: f64,
}

/// `2 (f0 - f*) / (eta T) + 3 L eta (alpha^2 Delta^2 + lambda^2 + sigma^2) + alpha Delta^2 + lambda`.
pub fn nonconvex_bound_rhs(p: &NonconvexParams) -> Result<NonconvexBound> {
    if !(p.eta > 0.0) || !(p.iters > 0.0) {
        return Err(Error::invalid("eta and T must be > 0"));
    }
    let d2 = p.delta * p.delta;
    let value = 2.0 * p.f0_minus_fstar / (p.eta * p.iters)
        + 3.0 * p.smoothness * p.eta * (p.alpha * p.alpha * d2 + p.lambda * p.lambda + p.sigma * p.sigma)
        + p.alpha * d2
        + p.lambda;
    Ok(NonconvexBound {
        value,
        side_condition_ok: 1.0 - p.alpha - p.lambda - 3.0 * p.smoothness * p.eta > 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub terminal_distance: f64,
    pub target: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Checks a run's terminal consensus distance against `lambda / alpha`
/// with the noise envelope `eta (1-alpha) sqrt(tau) sigma0 sqrt((M+1)/M) / alpha`
/// and the finite-`M` band `(lambda / alpha) / sqrt(M)`, widened by `slack`.
pub fn empirical_valley_width_check(run: &RunResult, slack: f64) -> Result<WidthReport> {
    let cfg = &run.config;
    if cfg.pp.push == PushMode::Off {
        return Err(Error::invalid("valley width check needs a run with push enabled"));
    }
    let terminal_distance = run
        .metrics
        .terminal_consensus_distance()
        .ok_or(Error::EmptyInput("run metrics"))?;
    let alpha = cfg.pp.alpha;
    let target = valley_width_limit(alpha, cfg.pp.lambda)?;
    let tau = match cfg.pp.period {
        CommPeriod::Fixed(t) => t,
        CommPeriod::Qsr(q) => q.tau_base,
    };
    let m = cfg.workers;
    let noise = noise_envelope(alpha, cfg.opt.eta, tau, cfg.noise.sigma0, m) / alpha;
    let finite_m = target / (m as f64).sqrt();
    let lower = (target - finite_m - slack).max(0.0);
    let upper = target + finite_m + noise + slack;
    Ok(WidthReport {
        terminal_distance,
        target,
        lower,
        upper,
        pass: (lower..=upper).contains(&terminal_distance),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitMeanReport {
    pub workers: usize,
    pub dim: usize,
    pub trials: usize,
    pub mean_norm: f64,
    pub std_err: f64,
    pub bound: f64,
    /// `mean_norm <= bound + 3 std_err`.
    pub pass: bool,
}

/// Monte Carlo `E||(1/M) sum u_i||` for i.i.d. uniform unit vectors against `1/sqrt(M)`.
pub fn mean_unit_vector_check(workers: usize, dim: usize, trials: usize, rng: &mut RngStream) -> Result<UnitMeanReport> {
    if workers == 0 || dim == 0 || trials < 2 {
        return Err(Error::invalid("need M >= 1, d >= 1 and at least two trials"));
    }
    let mut norms = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut sum = vec![0.0; dim];
        for _ in 0..workers {
            let u = sample_unit_sphere(dim, rng)?;
            sum.iter_mut().zip(u.iter()).for_each(|(s, v)| *s += v);
        }
        norms.push(sum.iter().map(|s| s * s).sum::<f64>().sqrt() / workers as f64);
    }
    let n = trials as f64;
    let mean = norms.iter().sum::<f64>() / n;
    let var = norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_err = (var / n).sqrt();
    let bound = 1.0 / (workers as f64).sqrt();
    Ok(UnitMeanReport {
        workers,
        dim,
        trials,
        mean_norm: mean,
        std_err,
        bound,
        pass: mean <= bound + 3.0 * std_err,
    })
}
