//! Two-dimensional views of the loss surface around a worker set.
//!
//! The plane is spanned by the top two right singular vectors of the gap
//! matrix `D = [x_m - x_A]`. They come from the eigenvectors of the small
//! `M x M` Gram matrix `D D^T`, so no `d x d` factorization is needed.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::par_map_range;
use crate::objectives::{Objective, Split};
use crate::param::{mean_vectors, ParamVector};

/// Largest grid a scan will evaluate.
pub const MAX_GRID_NODES: usize = 1_000_000;

/// Relative squared-singular-value cutoff below which the second direction
/// is treated as absent.
const RANK_TOL: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub x_a: ParamVector,
    pub dx: ParamVector,
    pub dy: ParamVector,
    /// Whether `dy` came from the data rather than the collinear fallback.
    pub dy_from_svd: bool,
}

/// Flips `v` so its largest-magnitude coordinate (first on ties) is positive.
fn fix_sign(v: &mut ParamVector) {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn orthonormalize(v: &ParamVector, against: &ParamVector) -> Option<ParamVector> {
    let mut out = v.clone();
    out.add_scaled(-v.dot(against), against);
    // second pass for accuracy
    let c = out.dot(against);
    out.add_scaled(-c, against);
    let n = out.norm();
    (n > 1e-8).then(|| out.scaled(1.0 / n))
}

/// Unit vector orthogonal to `dx`, from the standard basis vector least
/// aligned with it.
fn complete_basis(dx: &ParamVector) -> Result<ParamVector> {
    let d = dx.dim();
    if d < 2 {
        return Err(Error::DegenerateGeometry("a 2-D basis needs dim >= 2".into()));
    }
    let mut k = 0;
    for (i, x) in dx.iter().enumerate() {
        if x.abs() < dx[k].abs() {
            k = i;
        }
    }
    orthonormalize(&ParamVector::basis(d, k), dx)
        .ok_or_else(|| Error::DegenerateGeometry("could not complete the basis".into()))
}

/// Average and top-two right singular directions of the worker gaps.
pub fn svd_basis(workers: &[ParamVector]) -> Result<Basis> {
    let m = workers.len();
    if m < 2 {
        return Err(Error::DegenerateGeometry("need at least two workers".into()));
    }
    let x_a = mean_vectors(workers)?;
    let gaps: Vec<ParamVector> = workers.iter().map(|w| w.sub(&x_a)).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| gaps[i].dot(&gaps[j]));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    if !(top > 0.0) || top.sqrt() < 1e-300 {
        return Err(Error::DegenerateGeometry("all workers coincide".into()));
    }
    let direction = |idx: usize| -> ParamVector {
        let coeffs = eig.eigenvectors.column(idx);
        let mut v = ParamVector::zeros(x_a.dim());
        for (c, g) in coeffs.iter().zip(&gaps) {
            v.add_scaled(*c, g);
        }
        v
    };
    let raw = direction(order[0]);
    let mut dx = raw.scaled(1.0 / raw.norm());
    fix_sign(&mut dx);
    let second = eig.eigenvalues[order[1]];
    let svd_dy = if second > RANK_TOL.max(1e-12 * top) {
        orthonormalize(&direction(order[1]), &dx)
    } else {
        None
    };
    let dy_from_svd = svd_dy.is_some();
    let mut dy = match svd_dy {
        Some(v) => v,
        None => complete_basis(&dx)?,
    };
    fix_sign(&mut dy);
    Ok(Basis {
        x_a,
        dx,
        dy,
        dy_from_svd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Projection {
    pub worker_id: usize,
    pub a: f64,
    pub b: f64,
    /// `||d_m - a dx - b dy||`.
    pub residual: f64,
}

pub fn project_workers(workers: &[ParamVector], basis: &Basis) -> Result<Vec<Projection>> {
    workers
        .iter()
        .enumerate()
        .map(|(m, w)| {
            basis.x_a.check_dim(w)?;
            let d = w.sub(&basis.x_a);
            let a = d.dot(&basis.dx);
            let b = d.dot(&basis.dy);
            let mut r = d;
            r.add_scaled(-a, &basis.dx);
            r.add_scaled(-b, &basis.dy);
            Ok(Projection {
                worker_id: m,
                a,
                b,
                residual: r.norm(),
            })
        })
        .collect()
}

/// Loss and, for classifiers, error at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub train_err: Option<f64>,
    pub test_err: Option<f64>,
}

fn evaluate(obj: &dyn Objective, x: &ParamVector) -> Result<Evaluation> {
    let (train_err, test_err) = match obj.classifier() {
        Some(mlp) => (
            Some(mlp.classification_error(x, Split::Train)?),
            Some(mlp.classification_error(x, Split::Test)?),
        ),
        None => (None, None),
    };
    Ok(Evaluation {
        train_loss: obj.value(x)?,
        test_loss: obj.test_value(x)?,
        train_err,
        test_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridNode {
    pub i: i64,
    pub j: i64,
    pub a: f64,
    pub b: f64,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub limit: f64,
    pub step: f64,
    /// Nodes per side, `2 floor(L / s) + 1`.
    pub side: usize,
    /// Row-major in `i`, then `j`.
    pub nodes: Vec<GridNode>,
}

impl LandscapeGrid {
    pub fn node(&self, i: i64, j: i64) -> Option<&GridNode> {
        let half = (self.side / 2) as i64;
        if i.abs() > half || j.abs() > half {
            return None;
        }
        self.nodes.get(((i + half) * self.side as i64 + (j + half)) as usize)
    }
}

/// Evaluates `x_A + a dx + b dy` for `a, b` in `{-n s, ..., n s}`, `n = floor(L / s)`.
pub fn scan_grid(obj: &dyn Objective, basis: &Basis, limit: f64, step: f64) -> Result<LandscapeGrid> {
    if !(limit > 0.0) || !(step > 0.0) || step > limit || !limit.is_finite() {
        return Err(Error::invalid(format!("need L > 0 and 0 < s <= L, got L = {limit}, s = {step}")));
    }
    basis.x_a.check_dim(&basis.dx)?;
    basis.x_a.check_dim(&basis.dy)?;
    // tolerate L / s landing just below an integer
    let half = (limit / step * (1.0 + 1e-12)).floor();
    let side_f = 2.0 * half + 1.0;
    if side_f * side_f > MAX_GRID_NODES as f64 {
        return Err(Error::invalid(format!(
            "grid of {side_f}^2 nodes exceeds the budget of {MAX_GRID_NODES}"
        )));
    }
    let half = half as i64;
    let side = (2 * half + 1) as usize;
    let nodes = par_map_range(side * side, |idx| {
        let i = (idx / side) as i64 - half;
        let j = (idx % side) as i64 - half;
        let a = i as f64 * step;
        let b = j as f64 * step;
        let x = if i == 0 && j == 0 {
            basis.x_a.clone()
        } else {
            let mut x = basis.x_a.clone();
            x.add_scaled(a, &basis.dx);
            x.add_scaled(b, &basis.dy);
            x
        };
        evaluate(obj, &x).map(|eval| GridNode { i, j, a, b, eval })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeGrid {
        limit,
        step,
        side,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpPoint {
    pub alpha: f64,
    pub eval: Evaluation,
}

/// Evaluates `(1 - alpha) x_a + alpha x_b` at `n` evenly spaced `alpha` in `[0, 1]`.
pub fn interpolation_scan(x_a: &ParamVector, x_b: &ParamVector, obj: &dyn Objective, n: usize) -> Result<Vec<InterpPoint>> {
    if n < 2 {
        return Err(Error::invalid("interpolation needs n >= 2"));
    }
    x_a.check_dim(x_b)?;
    par_map_range(n, |k| {
        let alpha = if k == n - 1 { 1.0 } else { k as f64 / (n - 1) as f64 };
        let x = ParamVector::from(
            x_a.iter()
                .zip(x_b.iter())
                .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
                .collect::<Vec<_>>(),
        );
        evaluate(obj, &x).map(|eval| InterpPoint { alpha, eval })
    })
    .into_iter()
    .collect()
}

/// Largest interior loss minus the larger endpoint loss.
pub fn barrier_height(curve: &[InterpPoint]) -> Option<f64> {
    if curve.len() < 3 {
        return None;
    }
    let ends = curve[0].eval.train_loss.max(curve[curve.len() - 1].eval.train_loss);
    curve[1..curve.len() - 1]
        .iter()
        .map(|p| p.eval.train_loss)
        .reduce(f64::max)
        .map(|peak| peak - ends)
}
