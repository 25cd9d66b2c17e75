use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

use super::{check_input, finite, Objective};

/// One Gaussian well: center, width and weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basin {
    pub center: Vec<f64>,
    pub width: f64,
    pub weight: f64,
}

impl Basin {
    pub fn new(center: Vec<f64>, width: f64, weight: f64) -> Self {
        Self {
            center,
            width,
            weight,
        }
    }
}

/// Smooth-min of Gaussian wells:
///
/// `f(x) = -T log sum_j w_j exp(-||x - mu_j||^2 / (2 s_j^2 T)) + T log sum_j w_j`
///
/// The shift makes `f >= 0` everywhere, with `f(mu) = 0` for a single basin.
/// Wider wells (`s_j`) are flatter; heavier wells (`w_j`) are deeper.
#[derive(Debug, Clone)]
pub struct MultiBasinObjective {
    basins: Vec<Basin>,
    temperature: f64,
    shift: f64,
    dim: usize,
}

impl MultiBasinObjective {
    pub fn new(basins: Vec<Basin>, temperature: f64) -> Result<Self> {
        let first = basins.first().ok_or(Error::EmptyInput("basin list"))?;
        let dim = first.center.len();
        if dim == 0 {
            return Err(Error::EmptyInput("basin center"));
        }
        for b in &basins {
            if b.center.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.center.len(),
                });
            }
            if !(b.width > 0.0) || !(b.weight > 0.0) || b.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid("basin widths and weights must be positive"));
            }
        }
        if !(temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        let shift = temperature * basins.iter().map(|b| b.weight).sum::<f64>().ln();
        Ok(Self {
            basins,
            temperature,
            shift,
            dim,
        })
    }

    pub fn basins(&self) -> &[Basin] {
        &self.basins
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Log-weights `e_j = log w_j - ||x - mu_j||^2 / (2 s_j^2 T)`.
    fn log_terms(&self, x: &[f64]) -> Vec<f64> {
        self.basins
            .iter()
            .map(|b| {
                let sq: f64 = x.iter().zip(&b.center).map(|(a, c)| (a - c) * (a - c)).sum();
                b.weight.ln() - sq / (2.0 * b.width * b.width * self.temperature)
            })
            .collect()
    }

    fn softmax(e: &[f64]) -> (f64, Vec<f64>) {
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<f64> = e.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = ex.iter().sum();
        (m + s.ln(), ex.into_iter().map(|v| v / s).collect())
    }

    /// Index of the basin whose term dominates at `x`.
    pub fn basin_of(&self, x: &ParamVector) -> usize {
        let e = self.log_terms(x);
        let mut best = 0;
        for (j, v) in e.iter().enumerate() {
            if *v > e[best] {
                best = j;
            }
        }
        best
    }

    /// Closed-form Hessian-vector product.
    pub fn hvp_exact(&self, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_input(self.dim, x)?;
        check_input(self.dim, v)?;
        let (_, p) = Self::softmax(&self.log_terms(x));
        let t = self.temperature;
        let a: Vec<Vec<f64>> = self
            .basins
            .iter()
            .map(|b| {
                let s2 = b.width * b.width;
                x.iter().zip(&b.center).map(|(xi, c)| (xi - c) / s2).collect()
            })
            .collect();
        let mut abar = vec![0.0; self.dim];
        let mut diag = 0.0;
        for (j, b) in self.basins.iter().enumerate() {
            diag += p[j] / (b.width * b.width);
            for (o, ai) in abar.iter_mut().zip(&a[j]) {
                *o += p[j] * ai;
            }
        }
        let abar_v: f64 = abar.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        let mut out: Vec<f64> = v.iter().map(|vi| diag * vi).collect();
        for (j, aj) in a.iter().enumerate() {
            let aj_v: f64 = aj.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (o, ai) in out.iter_mut().zip(aj) {
                *o -= p[j] * ai * aj_v / t;
            }
        }
        for (o, ai) in out.iter_mut().zip(&abar) {
            *o += ai * abar_v / t;
        }
        Ok(ParamVector::from(out))
    }
}

impl Objective for MultiBasinObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> &'static str {
        "multi-basin"
    }

    fn value(&self, x: &ParamVector) -> Result<f64> {
        check_input(self.dim, x)?;
        let (lse, _) = Self::softmax(&self.log_terms(x));
        finite(-self.temperature * lse + self.shift, "multi-basin loss")
    }

    fn full_grad(&self, x: &ParamVector) -> Result<ParamVector> {
        check_input(self.dim, x)?;
        let (_, p) = Self::softmax(&self.log_terms(x));
        let mut g = vec![0.0; self.dim];
        for (pj, b) in p.iter().zip(&self.basins) {
            let s2 = b.width * b.width;
            for ((gi, xi), c) in g.iter_mut().zip(x.iter()).zip(&b.center) {
                *gi += pj * (xi - c) / s2;
            }
        }
        let g = ParamVector::from(g);
        g.ensure_finite("multi-basin gradient")?;
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

    /// Uniform over the bounding box of the centers, padded by the widest basin.
    fn initial_point(&self, rng: &mut RngStream) -> ParamVector {
        let pad = self.basins.iter().map(|b| b.width).fold(0.0, f64::max);
        let x: Vec<f64> = (0..self.dim)
            .map(|i| {
                let lo = self.basins.iter().map(|b| b.center[i]).fold(f64::INFINITY, f64::min);
                let hi = self.basins.iter().map(|b| b.center[i]).fold(f64::NEG_INFINITY, f64::max);
                rng.uniform_range(lo - pad, hi + pad)
            })
            .collect();
        ParamVector::from(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::test_util::{fd_grad, rel_err};

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

    #[test]
    fn single_basin_minimum_is_zero() {
        let f = MultiBasinObjective::new(vec![Basin::new(vec![1.0, 2.0, 3.0], 0.7, 5.0)], 1.0).unwrap();
        let v = f.value(&ParamVector::from(vec![1.0, 2.0, 3.0])).unwrap();
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn nonnegative_everywhere() {
        let f = two_basins();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..500 {
            let x = ParamVector::from(vec![rng.uniform_range(-8.0, 8.0), rng.uniform_range(-8.0, 8.0)]);
            assert!(f.value(&x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let f = two_basins();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..20 {
            let x = f.initial_point(&mut rng);
            assert!(rel_err(&fd_grad(&f, &x), &f.full_grad(&x).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn fd_hvp_matches_closed_form_and_is_symmetric() {
        let f = two_basins();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..20 {
            let x = f.initial_point(&mut rng);
            let u = ParamVector::from(vec![rng.normal(), rng.normal()]);
            let v = ParamVector::from(vec![rng.normal(), rng.normal()]);
            let hv = f.hvp(&x, &v).unwrap();
            let exact = f.hvp_exact(&x, &v).unwrap();
            assert!(rel_err(&hv, &exact) < 1e-6);
            let hu = f.hvp(&x, &u).unwrap();
            let (a, b) = (u.dot(&hv), v.dot(&hu));
            assert!((a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-8), "{a} vs {b}");
        }
    }

    #[test]
    fn basin_membership() {
        let f = two_basins();
        assert_eq!(f.basin_of(&ParamVector::from(vec![-3.0, 0.0])), 0);
        assert_eq!(f.basin_of(&ParamVector::from(vec![3.0, 0.5])), 1);
    }
}
