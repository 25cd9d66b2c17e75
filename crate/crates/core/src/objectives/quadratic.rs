use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

use super::{check_input, finite, Objective};

/// `f(x) = 0.5 * sum_i c_i (x_i - mu_i)^2 + f0` with a diagonal Hessian.
///
/// Curvatures may be zero (flat directions) or negative (saddles).
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    curvatures: ParamVector,
    center: ParamVector,
    f0: f64,
    init_scale: f64,
}

impl QuadraticObjective {
    pub fn new(curvatures: Vec<f64>, center: Vec<f64>, f0: f64) -> Result<Self> {
        let curvatures = ParamVector::new(curvatures)?;
        let center = ParamVector::new(center)?;
        curvatures.check_dim(&center)?;
        if !(f0 >= 0.0) || !f0.is_finite() {
            return Err(Error::invalid("quadratic offset f0 must be finite and >= 0"));
        }
        Ok(Self {
            curvatures,
            center,
            f0,
            init_scale: 1.0,
        })
    }

    /// Isotropic `0.5 * c * ||x||^2 + f0`.
    pub fn isotropic(dim: usize, c: f64, f0: f64) -> Result<Self> {
        Self::new(vec![c; dim], vec![0.0; dim], f0)
    }

    /// Curvatures drawn uniformly from `[c_min, c_max]`, centered at zero.
    pub fn random(dim: usize, c_min: f64, c_max: f64, f0: f64, rng: &mut RngStream) -> Result<Self> {
        if !(c_min <= c_max) {
            return Err(Error::invalid("c_min must not exceed c_max"));
        }
        let c = (0..dim).map(|_| rng.uniform_range(c_min, c_max)).collect();
        Self::new(c, vec![0.0; dim], f0)
    }

    /// Standard deviation of the Gaussian initial point around the center.
    pub fn with_init_scale(mut self, scale: f64) -> Self {
        self.init_scale = scale;
        self
    }

    pub fn curvatures(&self) -> &ParamVector {
        &self.curvatures
    }

    pub fn center(&self) -> &ParamVector {
        &self.center
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// `delta^T H delta`.
    pub fn directional_curvature(&self, delta: &ParamVector) -> f64 {
        delta
            .iter()
            .zip(self.curvatures.iter())
            .map(|(d, c)| c * d * d)
            .sum()
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.curvatures.dim()
    }

    fn kind(&self) -> &'static str {
        "quadratic"
    }

    fn value(&self, x: &ParamVector) -> Result<f64> {
        check_input(self.dim(), x)?;
        let mut acc = 0.0;
        for ((xi, mi), ci) in x.iter().zip(self.center.iter()).zip(self.curvatures.iter()) {
            let r = xi - mi;
            acc += ci * r * r;
        }
        finite(0.5 * acc + self.f0, "quadratic loss")
    }

    fn full_grad(&self, x: &ParamVector) -> Result<ParamVector> {
        check_input(self.dim(), x)?;
        let g: Vec<f64> = x
            .iter()
            .zip(self.center.iter())
            .zip(self.curvatures.iter())
            .map(|((xi, mi), ci)| ci * (xi - mi))
            .collect();
        let g = ParamVector::from(g);
        g.ensure_finite("quadratic gradient")?;
        Ok(g)
    }

    fn shard_loss_grad(
        &self,
        x: &ParamVector,
        _shard: usize,
        _rng: &mut RngStream,
    ) -> Result<(f64, ParamVector)> {
        Ok((self.value(x)?, self.full_grad(x)?))
    }

    fn hvp(&self, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_input(self.dim(), x)?;
        check_input(self.dim(), v)?;
        Ok(ParamVector::from(
            v.iter().zip(self.curvatures.iter()).map(|(vi, ci)| ci * vi).collect::<Vec<_>>(),
        ))
    }

    fn initial_point(&self, rng: &mut RngStream) -> ParamVector {
        let mut x = self.center.clone();
        for xi in x.iter_mut() {
            *xi += self.init_scale * rng.normal();
        }
        x
    }
}
