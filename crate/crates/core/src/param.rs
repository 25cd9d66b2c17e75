//! Flat parameter vectors and the handful of dense operations every other
//! module is written against.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Flat `f64` parameter vector of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Checked constructor: rejects empty and non-finite input.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("parameter vector"));
        }
        let v = Self(data);
        v.ensure_finite("parameter vector")?;
        Ok(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NumericalOverflow(format!("{what} has non-finite entries")))
        }
    }

    pub fn check_dim(&self, other: &ParamVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self - other`.
    pub fn sub(&self, other: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, a: f64) -> ParamVector {
        Self(self.0.iter().map(|v| a * v).collect())
    }

    /// In place `self += a * x`.
    pub fn add_scaled(&mut self, a: f64, x: &ParamVector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += a * v;
        }
    }

    pub fn distance(&self, other: &ParamVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `a * x + y`.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    x.check_dim(y)?;
    let out: Vec<f64> = x.iter().zip(y.iter()).map(|(xi, yi)| a * xi + yi).collect();
    let out = ParamVector(out);
    out.ensure_finite("axpy result")?;
    Ok(out)
}

/// Unit vector pointing from `from` to `to`.
pub fn unit_direction(from: &ParamVector, to: &ParamVector, eps0: f64) -> Result<ParamVector> {
    from.check_dim(to)?;
    if !(eps0 > 0.0) {
        return Err(Error::invalid("eps0 must be positive"));
    }
    let gap = to.sub(from);
    let norm = gap.norm();
    if !(norm >= eps0) {
        return Err(Error::DegenerateDirection { norm });
    }
    Ok(gap.scaled(1.0 / norm))
}

/// Elementwise mean, accumulated in list order.
pub fn mean_vectors(vs: &[ParamVector]) -> Result<ParamVector> {
    let first = vs.first().ok_or(Error::EmptyInput("vector list"))?;
    let mut acc = vec![0.0; first.dim()];
    for v in vs {
        first.check_dim(v)?;
        for (a, x) in acc.iter_mut().zip(v.iter()) {
            *a += x;
        }
    }
    let inv = 1.0 / vs.len() as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(ParamVector(acc))
}

/// Uniform draw from the unit sphere in `d` dimensions (normalized Gaussian).
pub fn sample_unit_sphere(d: usize, rng: &mut RngStream) -> Result<ParamVector> {
    if d == 0 {
        return Err(Error::EmptyInput("sphere dimension"));
    }
    loop {
        let mut v = ParamVector::zeros(d);
        rng.fill_normal(&mut v, 1.0);
        let n = v.norm();
        // a zero Gaussian draw has probability zero but is cheap to reject
        if n > 0.0 && n.is_finite() {
            v.iter_mut().for_each(|x| *x /= n);
            return Ok(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::from(v.to_vec())
    }

    #[test]
    fn axpy_examples() {
        let v = pv(&[1.5, -2.0]);
        assert_eq!(axpy(0.0, &pv(&[9.0, 9.0]), &v).unwrap(), v);
        let neg = v.scaled(-1.0);
        assert_eq!(axpy(1.0, &v, &neg).unwrap(), pv(&[0.0, 0.0]));
        assert_eq!(axpy(2.0, &pv(&[1.0, 2.0]), &pv(&[3.0, 4.0])).unwrap(), pv(&[5.0, 8.0]));
        assert!(matches!(
            axpy(1.0, &pv(&[1.0]), &pv(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unit_direction_examples() {
        let u = unit_direction(&pv(&[0.0, 0.0]), &pv(&[3.0, 4.0]), 1e-12).unwrap();
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
        assert!(matches!(
            unit_direction(&pv(&[1.0, 1.0]), &pv(&[1.0, 1.0]), 1e-12),
            Err(Error::DegenerateDirection { .. })
        ));
        assert_eq!(unit_direction(&pv(&[0.0]), &pv(&[-2.0]), 1e-12).unwrap(), pv(&[-1.0]));
    }

    #[test]
    fn mean_examples() {
        let v = pv(&[1.0, -3.0]);
        assert_eq!(mean_vectors(&[v.clone()]).unwrap(), v);
        assert_eq!(mean_vectors(&[pv(&[0.0, 2.0]), pv(&[2.0, 0.0])]).unwrap(), pv(&[1.0, 1.0]));
        assert_eq!(mean_vectors(&[v.clone(), v.scaled(-1.0)]).unwrap(), pv(&[0.0, 0.0]));
        assert!(matches!(mean_vectors(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn checked_constructor() {
        assert!(ParamVector::new(vec![]).is_err());
        assert!(matches!(
            ParamVector::new(vec![1.0, f64::NAN]),
            Err(Error::NumericalOverflow(_))
        ));
    }

    #[test]
    fn sphere_one_dimensional() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..50 {
            let u = sample_unit_sphere(1, &mut rng).unwrap();
            assert!(u[0] == 1.0 || u[0] == -1.0);
        }
    }

    #[test]
    fn sphere_mean_concentrates() {
        // mean of N unit vectors has E||mean|| <= 1/sqrt(N)
        let n = 10_000;
        let d = 16;
        let mut rng = RngStream::new(11, 5);
        let draws: Vec<ParamVector> =
            (0..n).map(|_| sample_unit_sphere(d, &mut rng).unwrap()).collect();
        let m = mean_vectors(&draws).unwrap();
        // each coordinate has variance 1/d, so ||mean||^2 has mean 1/N and
        // standard deviation sqrt(2/d)/N; allow 5 of them
        let bound = (1.0 + 5.0 * (2.0 / d as f64).sqrt()) / n as f64;
        assert!(m.dot(&m) <= bound, "{} > {}", m.dot(&m), bound);
    }

    proptest! {
        #[test]
        fn sphere_draws_are_unit(d in 1usize..64, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 1);
            let u = sample_unit_sphere(d, &mut rng).unwrap();
            prop_assert!((u.norm() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn unit_direction_has_unit_norm(
            a in proptest::collection::vec(-1e3f64..1e3, 1..16),
            shift in proptest::collection::vec(-1e3f64..1e3, 16),
        ) {
            let from = ParamVector::from(a.clone());
            let to = ParamVector::from(a.iter().zip(&shift).map(|(x, s)| x + s).collect::<Vec<_>>());
            if let Ok(u) = unit_direction(&from, &to, 1e-12) {
                prop_assert!((u.norm() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn mean_is_order_fixed(vs in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 4), 1..10)) {
            let pvs: Vec<ParamVector> = vs.into_iter().map(ParamVector::from).collect();
            let a = mean_vectors(&pvs).unwrap();
            let b = mean_vectors(&pvs).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
