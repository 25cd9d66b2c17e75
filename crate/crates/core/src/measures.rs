//! Flatness and sharpness measures over converged worker sets.
//!
//! The central one is the inverse mean valley: from the worker average `x_A`,
//! walk outward along each worker's direction until the loss reaches
//! `kappa * f(x_A)`, and report minus the mean walked distance. The other
//! measures (epsilon-sharpness, LPF, Fisher-Rao, Hessian trace and top
//! eigenvalue) are point measures at `x_A`, built on Hessian-vector products.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{par_map, par_map_range};
use crate::objectives::Objective;
use crate::param::{mean_vectors, unit_direction, ParamVector};
use crate::rng::RngStream;
use crate::DEFAULT_EPS0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Named contiguous segments tiling a parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerLayout {
    segments: Vec<Segment>,
}

impl LayerLayout {
    pub fn new(segments: Vec<(String, usize, usize)>) -> Result<Self> {
        let mut next = 0;
        let mut out = Vec::with_capacity(segments.len());
        for (name, offset, len) in segments {
            if offset != next || len == 0 {
                return Err(Error::invalid(format!(
                    "segment `{name}` at {offset}+{len} does not continue the layout at {next}"
                )));
            }
            next += len;
            out.push(Segment { name, offset, len });
        }
        if out.is_empty() {
            return Err(Error::EmptyInput("layer layout"));
        }
        Ok(Self { segments: out })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len)
    }
}

/// Scales every layout segment to unit Frobenius norm.
pub fn normalize_layers(x: &ParamVector, layout: &LayerLayout) -> Result<ParamVector> {
    if layout.total_len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_len(),
            got: x.dim(),
        });
    }
    let mut out = x.clone();
    for seg in layout.segments() {
        let part = &mut out[seg.offset..seg.offset + seg.len];
        let n = part.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroNormSegment(seg.name.clone()));
        }
        part.iter_mut().for_each(|v| *v /= n);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub name: String,
    pub value: f64,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_direction_betas: Option<Vec<f64>>,
}

impl MeasureResult {
    fn new(name: &str, value: f64, params: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            value,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            per_direction_betas: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValleyParams {
    /// Loss multiple that marks the valley boundary.
    pub kappa: f64,
    /// Line-search resolution.
    pub step: f64,
    pub max_steps: usize,
}

impl Default for ValleyParams {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            step: 0.1,
            max_steps: 1_000_000,
        }
    }
}

/// Distance from `x_a` along unit `delta` to the first grid point
/// `j * step` whose loss reaches `threshold`.
fn boundary_distance(
    obj: &dyn Objective,
    x_a: &ParamVector,
    delta: &ParamVector,
    threshold: f64,
    p: &ValleyParams,
    direction: usize,
) -> Result<f64> {
    let mut x = x_a.clone();
    for j in 1..=p.max_steps {
        let beta = j as f64 * p.step;
        for ((xi, ai), di) in x.iter_mut().zip(x_a.iter()).zip(delta.iter()) {
            *xi = ai + beta * di;
        }
        if obj.value(&x)? >= threshold {
            return Ok(beta);
        }
    }
    Err(Error::BoundaryNotFound {
        direction,
        max_steps: p.max_steps,
    })
}

/// Inverse mean valley: `-(1/M) sum_m beta_m`.
///
/// When a layout is given, every worker is first layer-normalized.
pub fn inverse_mean_valley(
    workers: &[ParamVector],
    obj: &dyn Objective,
    p: &ValleyParams,
    layout: Option<&LayerLayout>,
) -> Result<MeasureResult> {
    if workers.len() < 2 {
        return Err(Error::invalid("inverse mean valley needs at least two workers"));
    }
    if !(p.kappa > 1.0) || !(p.step > 0.0) || p.max_steps == 0 {
        return Err(Error::invalid("need kappa > 1, step > 0, max_steps >= 1"));
    }
    let normalized;
    let workers = match layout {
        Some(l) => {
            normalized = workers.iter().map(|w| normalize_layers(w, l)).collect::<Result<Vec<_>>>()?;
            &normalized[..]
        }
        None => workers,
    };
    let x_a = mean_vectors(workers)?;
    let loss_a = obj.value(&x_a)?;
    if !(loss_a > 0.0) {
        return Err(Error::invalid(format!(
            "loss at the worker average must be positive, got {loss_a}"
        )));
    }
    let deltas = workers
        .iter()
        .map(|w| unit_direction(&x_a, w, DEFAULT_EPS0))
        .collect::<Result<Vec<_>>>()?;
    let threshold = p.kappa * loss_a;
    let betas = par_map_range(deltas.len(), |m| boundary_distance(obj, &x_a, &deltas[m], threshold, p, m))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mv = betas.iter().sum::<f64>() / betas.len() as f64;
    let mut r = MeasureResult::new(
        "inv_mv",
        -mv,
        &[
            ("kappa", p.kappa),
            ("step", p.step),
            ("max_steps", p.max_steps as f64),
            ("normalized", layout.is_some() as u8 as f64),
        ],
    );
    r.per_direction_betas = Some(betas);
    Ok(r)
}

/// Perturbation box for epsilon-sharpness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharpnessBox {
    /// `delta_i = eps * sign(g_i)`.
    #[default]
    Uniform,
    /// `delta_i = eps * (|x_i| + 1) * sign(g_i)`.
    Relative,
}

/// Loss increase at the gradient-sign corner of the `eps` box. `sign(0)` is +1.
pub fn epsilon_sharpness(x: &ParamVector, obj: &dyn Objective, eps: f64, shape: SharpnessBox) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::invalid("eps must be >= 0"));
    }
    let g = obj.full_grad(x)?;
    let mut y = x.clone();
    for ((yi, gi), xi) in y.iter_mut().zip(g.iter()).zip(x.iter()) {
        let s = if *gi < 0.0 { -1.0 } else { 1.0 };
        let radius = match shape {
            SharpnessBox::Uniform => eps,
            SharpnessBox::Relative => eps * (xi.abs() + 1.0),
        };
        *yi += s * radius;
    }
    Ok(obj.value(&y)? - obj.value(x)?)
}

/// Monte Carlo estimate of the Gaussian-smoothed loss `E f(x + e)`, `e ~ N(0, sigma^2 I)`.
pub fn lpf_measure(x: &ParamVector, obj: &dyn Objective, sigma: f64, n_mc: usize, rng: &mut RngStream) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::invalid("n_mc must be >= 1"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma must be >= 0"));
    }
    let points: Vec<ParamVector> = (0..n_mc)
        .map(|_| {
            let mut p = x.clone();
            for v in p.iter_mut() {
                *v += sigma * rng.normal();
            }
            p
        })
        .collect();
    let vals = par_map(&points, |p| obj.value(p)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().sum::<f64>() / n_mc as f64)
}

/// `<x, H(x) x>`, not clamped.
pub fn fisher_rao(x: &ParamVector, obj: &dyn Objective) -> Result<f64> {
    Ok(x.dot(&obj.hvp(x, x)?))
}

/// Hutchinson trace estimate with Rademacher probes.
pub fn hessian_trace(x: &ParamVector, obj: &dyn Objective, n_probes: usize, rng: &mut RngStream) -> Result<f64> {
    if n_probes == 0 {
        return Err(Error::invalid("n_probes must be >= 1"));
    }
    let probes: Vec<ParamVector> = (0..n_probes)
        .map(|_| ParamVector::from((0..x.dim()).map(|_| rng.rademacher()).collect::<Vec<_>>()))
        .collect();
    let quad = par_map(&probes, |v| obj.hvp(x, v).map(|hv| v.dot(&hv)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(quad.iter().sum::<f64>() / n_probes as f64)
}

/// Trace from the standard basis probes: exact up to the HVP's own error.
pub fn hessian_trace_basis(x: &ParamVector, obj: &dyn Objective) -> Result<f64> {
    let d = x.dim();
    let diag = par_map_range(d, |k| obj.hvp(x, &ParamVector::basis(d, k)).map(|hv| hv[k]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(diag.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerIteration {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Dominant-magnitude Hessian eigenvalue by power iteration on HVPs. Stops
/// once successive Rayleigh quotients differ by less than `tol`.
pub fn hessian_lambda_max(
    x: &ParamVector,
    obj: &dyn Objective,
    iters: usize,
    tol: f64,
    rng: &mut RngStream,
) -> Result<PowerIteration> {
    if iters == 0 {
        return Err(Error::invalid("iters must be >= 1"));
    }
    let mut v = crate::param::sample_unit_sphere(x.dim(), rng)?;
    let mut prev: Option<f64> = None;
    let mut rq = 0.0;
    for it in 1..=iters {
        let hv = obj.hvp(x, &v)?;
        rq = v.dot(&hv);
        let n = hv.norm();
        if n == 0.0 {
            return Ok(PowerIteration {
                value: 0.0,
                converged: true,
                iterations: it,
            });
        }
        if let Some(p) = prev {
            if (rq - p).abs() < tol {
                return Ok(PowerIteration {
                    value: rq,
                    converged: true,
                    iterations: it,
                });
            }
        }
        prev = Some(rq);
        v = hv.scaled(1.0 / n);
    }
    Ok(PowerIteration {
        value: rq,
        converged: false,
        iterations: iters,
    })
}

/// Kendall's tau-a: `(concordant - discordant) / C(n, 2)`, ties count zero.
///
/// Runs in `O(n log n)`: sort by `(a, b)`, then count discordant pairs as
/// strict inversions of `b` during a merge sort.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("kendall tau needs at least two observations"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NumericalOverflow("kendall tau input".into()));
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let tied_pairs = |runs: &mut dyn Iterator<Item = bool>| -> u64 {
        // `runs` yields "same as previous" flags
        let mut total = 0u64;
        let mut run = 1u64;
        for same in runs {
            if same {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let ties_a = tied_pairs(&mut pairs.windows(2).map(|w| w[0].0 == w[1].0));
    let ties_ab = tied_pairs(&mut pairs.windows(2).map(|w| w[0] == w[1]));

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys);
    let ties_b = tied_pairs(&mut ys.windows(2).map(|w| w[0] == w[1]));

    let total = (n as u64) * (n as u64 - 1) / 2;
    let untied = total - ties_a - ties_b + ties_ab;
    let concordant = untied - discordant;
    Ok((concordant as f64 - discordant as f64) / total as f64)
}

/// Sorts `v` and returns the number of strictly inverted pairs.
fn count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            inv += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    inv
}
