//! Loss surfaces.
//!
//! Every objective exposes its value, full gradient, a per-shard stochastic
//! gradient and a Hessian-vector product. Objectives are immutable once
//! built and are shared read-only across worker threads; any randomness
//! comes from the caller's [`RngStream`].

mod mlp;
mod multibasin;
mod quadratic;

pub use mlp::{Dataset, MlpConfig, MlpObjective, Split};
pub use multibasin::{Basin, MultiBasinObjective};
pub use quadratic::QuadraticObjective;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::LayerLayout;
use crate::param::ParamVector;
use crate::rng::RngStream;

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> &'static str;

    fn value(&self, x: &ParamVector) -> Result<f64>;

    fn full_grad(&self, x: &ParamVector) -> Result<ParamVector>;

    /// Loss and gradient on one draw from `shard`, without added noise.
    ///
    /// Synthetic objectives have no data and return the full loss and
    /// gradient for every shard.
    fn shard_loss_grad(
        &self,
        x: &ParamVector,
        shard: usize,
        rng: &mut RngStream,
    ) -> Result<(f64, ParamVector)>;

    /// Number of data shards, or `None` when any shard id is accepted.
    fn num_shards(&self) -> Option<usize> {
        None
    }

    fn hvp(&self, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        fd_hvp(self, x, v)
    }

    /// Starting point for a run.
    fn initial_point(&self, rng: &mut RngStream) -> ParamVector;

    /// Per-component layout, for objectives with layered parameters.
    fn layout(&self) -> Option<LayerLayout> {
        None
    }

    fn classifier(&self) -> Option<&MlpObjective> {
        None
    }

    /// Held-out loss, for objectives that carry a test split.
    fn test_value(&self, _x: &ParamVector) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Additive isotropic Gaussian gradient noise.
///
/// Each coordinate gets standard deviation `sigma0 / sqrt(d)`, so the total
/// variance `E||g - grad f||^2` equals `sigma0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub sigma0: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { sigma0: 0.0 }
    }

    pub fn new(sigma0: f64) -> Result<Self> {
        if !(sigma0 >= 0.0) || !sigma0.is_finite() {
            return Err(Error::invalid("sigma0 must be finite and >= 0"));
        }
        Ok(Self { sigma0 })
    }

    pub fn perturb(&self, g: &mut ParamVector, rng: &mut RngStream) {
        if self.sigma0 == 0.0 {
            return;
        }
        let std = self.sigma0 / (g.dim() as f64).sqrt();
        for gi in g.iter_mut() {
            *gi += std * rng.normal();
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::none()
    }
}

/// Stochastic gradient: shard gradient plus [`NoiseModel`] noise. Returns the
/// minibatch loss alongside.
pub fn stoch_grad(
    obj: &dyn Objective,
    x: &ParamVector,
    shard: usize,
    rng: &mut RngStream,
    noise: &NoiseModel,
) -> Result<(f64, ParamVector)> {
    if let Some(count) = obj.num_shards() {
        if shard >= count {
            return Err(Error::InvalidShard { shard, count });
        }
    }
    let (loss, mut g) = obj.shard_loss_grad(x, shard, rng)?;
    noise.perturb(&mut g, rng);
    Ok((loss, g))
}

/// Central-difference Hessian-vector product on the full gradient, with step
/// `1e-4 * (1 + ||x||) / ||v||`.
pub fn fd_hvp<O: Objective + ?Sized>(obj: &O, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
    x.check_dim(v)?;
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(ParamVector::zeros(v.dim()));
    }
    let eps = 1e-4 * (1.0 + x.norm()) / vn.max(1e-12);
    let mut plus = x.clone();
    plus.add_scaled(eps, v);
    let mut minus = x.clone();
    minus.add_scaled(-eps, v);
    let gp = obj.full_grad(&plus)?;
    let gm = obj.full_grad(&minus)?;
    let inv = 1.0 / (2.0 * eps);
    Ok(ParamVector::from(
        gp.iter().zip(gm.iter()).map(|(a, b)| (a - b) * inv).collect::<Vec<_>>(),
    ))
}

pub(crate) fn check_input(dim: usize, x: &ParamVector) -> Result<()> {
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.dim(),
        });
    }
    Ok(())
}

pub(crate) fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalOverflow(format!("{what} is {v}")))
    }
}
