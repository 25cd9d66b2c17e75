//! One-hidden-layer rectifier network with softmax cross-entropy, trained on
//! Gaussian-blob classification data split into disjoint shards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::LayerLayout;
use crate::param::ParamVector;
use crate::rng::{RngStream, DATA_STREAM};

use super::{check_input, finite, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Row-major features with integer labels.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub num_features: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpConfig {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
    pub train_points: usize,
    pub test_points: usize,
    /// Standard deviation of class centers; points have unit spread around them.
    pub class_spread: f64,
    pub num_shards: usize,
    pub batch_size: usize,
    pub data_seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            inputs: 4,
            hidden: 8,
            classes: 3,
            train_points: 600,
            test_points: 200,
            class_spread: 3.0,
            num_shards: 4,
            batch_size: 16,
            data_seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpObjective {
    cfg: MlpConfig,
    train: Dataset,
    test: Dataset,
    shards: Vec<Vec<usize>>,
    layout: LayerLayout,
}

impl MlpObjective {
    /// Samples blob data from `(data_seed, DATA_STREAM)` and shards the
    /// training set into `num_shards` disjoint, near-equal index sets.
    pub fn generate(cfg: &MlpConfig) -> Result<Self> {
        if cfg.inputs == 0 || cfg.hidden == 0 || cfg.classes < 2 {
            return Err(Error::invalid("mlp needs inputs >= 1, hidden >= 1, classes >= 2"));
        }
        if cfg.num_shards == 0 || cfg.train_points < cfg.num_shards {
            return Err(Error::invalid("need at least one training point per shard"));
        }
        if cfg.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        let mut rng = RngStream::new(cfg.data_seed, DATA_STREAM);
        let centers: Vec<f64> = (0..cfg.classes * cfg.inputs)
            .map(|_| cfg.class_spread * rng.normal())
            .collect();
        let sample = |n: usize, rng: &mut RngStream| {
            let mut ds = Dataset {
                features: Vec::with_capacity(n * cfg.inputs),
                labels: Vec::with_capacity(n),
                num_features: cfg.inputs,
            };
            for i in 0..n {
                let label = i % cfg.classes;
                for k in 0..cfg.inputs {
                    ds.features.push(centers[label * cfg.inputs + k] + rng.normal());
                }
                ds.labels.push(label);
            }
            ds
        };
        let train = sample(cfg.train_points, &mut rng);
        let test = sample(cfg.test_points, &mut rng);
        let mut order: Vec<usize> = (0..cfg.train_points).collect();
        rng.shuffle(&mut order);
        let shards = split_even(&order, cfg.num_shards);
        Self::from_parts(cfg.clone(), train, test, shards)
    }

    pub fn from_parts(cfg: MlpConfig, train: Dataset, test: Dataset, shards: Vec<Vec<usize>>) -> Result<Self> {
        let (k, h, c) = (cfg.inputs, cfg.hidden, cfg.classes);
        if train.num_features != k || (!test.is_empty() && test.num_features != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: train.num_features,
            });
        }
        let mut seen = vec![false; train.len()];
        for s in &shards {
            for &i in s {
                if i >= train.len() || seen[i] {
                    return Err(Error::invalid("shards must be disjoint subsets of the training set"));
                }
                seen[i] = true;
            }
        }
        let layout = LayerLayout::new(vec![
            ("fc1.weight".into(), 0, h * k),
            ("fc1.bias".into(), h * k, h),
            ("fc2.weight".into(), h * k + h, c * h),
            ("fc2.bias".into(), h * k + h + c * h, c),
        ])?;
        Ok(Self {
            cfg,
            train,
            test,
            shards,
            layout,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.cfg
    }

    pub fn shards(&self) -> &[Vec<usize>] {
        &self.shards
    }

    pub fn dataset(&self, split: Split) -> &Dataset {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    /// Shard id of every training point.
    pub fn shard_assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.train.len()];
        for (s, idx) in self.shards.iter().enumerate() {
            for &i in idx {
                out[i] = Some(s);
            }
        }
        out
    }

    fn logits(&self, x: &[f64], row: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        let (k, h, c) = (self.cfg.inputs, self.cfg.hidden, self.cfg.classes);
        let (w1, rest) = x.split_at(h * k);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(c * h);
        for j in 0..h {
            let mut a = b1[j];
            for (w, f) in w1[j * k..(j + 1) * k].iter().zip(row) {
                a += w * f;
            }
            hidden[j] = a;
        }
        for o in 0..c {
            let mut a = b2[o];
            for (w, hv) in w2[o * h..(o + 1) * h].iter().zip(hidden.iter()) {
                a += w * hv.max(0.0);
            }
            out[o] = a;
        }
    }

    /// Mean cross-entropy over `idx`, plus its gradient when `grad` is set.
    fn loss_over<I>(&self, x: &[f64], data: &Dataset, idx: I, mut grad: Option<&mut [f64]>) -> f64
    where
        I: Iterator<Item = usize>,
    {
        let (k, h, c) = (self.cfg.inputs, self.cfg.hidden, self.cfg.classes);
        let mut hidden = vec![0.0; h];
        let mut z = vec![0.0; c];
        let mut dh = vec![0.0; h];
        let mut loss = 0.0;
        let mut n = 0usize;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        for i in idx {
            n += 1;
            let row = data.row(i);
            let y = data.labels[i];
            self.logits(x, row, &mut hidden, &mut z);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = z.iter().map(|v| (v - m).exp()).sum();
            let lse = m + s.ln();
            loss += lse - z[y];
            let Some(g) = grad.as_deref_mut() else { continue };
            let (gw1, rest) = g.split_at_mut(h * k);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(c * h);
            let w2 = &x[h * k + h..h * k + h + c * h];
            dh.iter_mut().for_each(|v| *v = 0.0);
            for o in 0..c {
                let dz = (z[o] - lse).exp() - if o == y { 1.0 } else { 0.0 };
                gb2[o] += dz;
                for j in 0..h {
                    gw2[o * h + j] += dz * hidden[j].max(0.0);
                    dh[j] += dz * w2[o * h + j];
                }
            }
            for j in 0..h {
                if hidden[j] > 0.0 {
                    gb1[j] += dh[j];
                    for (gw, f) in gw1[j * k..(j + 1) * k].iter_mut().zip(row) {
                        *gw += dh[j] * f;
                    }
                }
            }
        }
        let inv = 1.0 / n.max(1) as f64;
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v *= inv);
        }
        loss * inv
    }

    /// Misclassification rate in percent.
    pub fn classification_error(&self, x: &ParamVector, split: Split) -> Result<f64> {
        check_input(self.dim(), x)?;
        let data = self.dataset(split);
        if data.is_empty() {
            return Err(Error::InvalidSplit(format!("{split:?} split is empty")));
        }
        let mut hidden = vec![0.0; self.cfg.hidden];
        let mut z = vec![0.0; self.cfg.classes];
        let mut wrong = 0usize;
        for i in 0..data.len() {
            self.logits(x, data.row(i), &mut hidden, &mut z);
            // ties resolve to the lowest class index
            let mut pred = 0;
            for (o, v) in z.iter().enumerate() {
                if *v > z[pred] {
                    pred = o;
                }
            }
            if pred != data.labels[i] {
                wrong += 1;
            }
        }
        Ok(100.0 * wrong as f64 / data.len() as f64)
    }
}

fn split_even(order: &[usize], parts: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    (0..parts)
        .map(|p| order[p * n / parts..(p + 1) * n / parts].to_vec())
        .collect()
}

impl Objective for MlpObjective {
    fn dim(&self) -> usize {
        let (k, h, c) = (self.cfg.inputs, self.cfg.hidden, self.cfg.classes);
        h * k + h + c * h + c
    }

    fn kind(&self) -> &'static str {
        "mlp"
    }

    fn value(&self, x: &ParamVector) -> Result<f64> {
        check_input(self.dim(), x)?;
        finite(self.loss_over(x, &self.train, 0..self.train.len(), None), "mlp loss")
    }

    fn full_grad(&self, x: &ParamVector) -> Result<ParamVector> {
        check_input(self.dim(), x)?;
        let mut g = ParamVector::zeros(self.dim());
        self.loss_over(x, &self.train, 0..self.train.len(), Some(&mut g));
        g.ensure_finite("mlp gradient")?;
        Ok(g)
    }

    /// Minibatch of `batch_size` indices drawn with replacement from the
    /// shard, or the whole shard when it is no larger than a batch.
    fn shard_loss_grad(
        &self,
        x: &ParamVector,
        shard: usize,
        rng: &mut RngStream,
    ) -> Result<(f64, ParamVector)> {
        check_input(self.dim(), x)?;
        let idx = self.shards.get(shard).ok_or(Error::InvalidShard {
            shard,
            count: self.shards.len(),
        })?;
        let mut g = ParamVector::zeros(self.dim());
        let loss = if idx.len() <= self.cfg.batch_size {
            self.loss_over(x, &self.train, idx.iter().copied(), Some(&mut g))
        } else {
            let batch: Vec<usize> = (0..self.cfg.batch_size).map(|_| idx[rng.below(idx.len())]).collect();
            self.loss_over(x, &self.train, batch.into_iter(), Some(&mut g))
        };
        g.ensure_finite("mlp minibatch gradient")?;
        Ok((finite(loss, "mlp minibatch loss")?, g))
    }

    fn num_shards(&self) -> Option<usize> {
        Some(self.shards.len())
    }

    /// He-style Gaussian weights, zero biases.
    fn initial_point(&self, rng: &mut RngStream) -> ParamVector {
        let (k, h, c) = (self.cfg.inputs, self.cfg.hidden, self.cfg.classes);
        let mut x = ParamVector::zeros(self.dim());
        let s1 = (2.0 / k as f64).sqrt();
        let s2 = (2.0 / h as f64).sqrt();
        rng.fill_normal(&mut x[..h * k], s1);
        rng.fill_normal(&mut x[h * k + h..h * k + h + c * h], s2);
        x
    }

    fn layout(&self) -> Option<LayerLayout> {
        Some(self.layout.clone())
    }

    fn classifier(&self) -> Option<&MlpObjective> {
        Some(self)
    }

    fn test_value(&self, x: &ParamVector) -> Result<Option<f64>> {
        check_input(self.dim(), x)?;
        if self.test.is_empty() {
            return Ok(None);
        }
        Ok(Some(finite(
            self.loss_over(x, &self.test, 0..self.test.len(), None),
            "mlp test loss",
        )?))
    }
}
