//! Experiment configuration files.
//!
//! A config is TOML with unknown keys rejected. `--set a.b=v` overrides are
//! applied to the parsed document before it is checked, so the echoed config
//! always reflects them.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use ppsim_core::consensus::{CommPeriod, ConsensusKind, LambdaSchedule, PullPushConfig, PushMode, Qsr};
use ppsim_core::objectives::{Basin, MlpConfig, MlpObjective, MultiBasinObjective, NoiseModel, Objective, QuadraticObjective};
use ppsim_core::rng::{RngStream, DATA_STREAM};
use ppsim_core::trainer::{LocalOptConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub workers: usize,
    pub total_iters: usize,
    /// Falls back to `PPSIM_THREADS`, then 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub independent_init: bool,
    #[serde(default)]
    pub average_momentum: bool,
    pub objective: ObjectiveSpec,
    pub pullpush: PullPushSpec,
    pub optimizer: LocalOptConfig,
    #[serde(default)]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectiveSpec {
    Quadratic(QuadraticSpec),
    MultiBasin(MultiBasinSpec),
    Mlp(MlpConfig),
}

/// Diagonal quadratic. Either explicit `curvatures` (and optional `center`),
/// or `dim` curvatures drawn uniformly from `[curvature_min, curvature_max]`
/// with `data_seed`, centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvatures: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default = "half")]
    pub curvature_min: f64,
    #[serde(default = "two")]
    pub curvature_max: f64,
    #[serde(default)]
    pub f0: f64,
    #[serde(default = "one")]
    pub init_scale: f64,
    #[serde(default)]
    pub data_seed: u64,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiBasinSpec {
    pub basins: Vec<Basin>,
    #[serde(default = "one")]
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullPushSpec {
    pub alpha: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Fixed communication period; ignored when `qsr` is set.
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qsr: Option<Qsr>,
    #[serde(default = "default_consensus")]
    pub consensus: ConsensusKind,
    #[serde(default = "default_push")]
    pub push: PushMode,
    #[serde(default = "default_schedule")]
    pub lambda_schedule: LambdaSchedule,
}

fn default_tau() -> usize {
    1
}

fn default_consensus() -> ConsensusKind {
    ConsensusKind::SimpleAvg
}

fn default_push() -> PushMode {
    PushMode::Off
}

fn default_schedule() -> LambdaSchedule {
    LambdaSchedule::Fixed
}

impl PullPushSpec {
    pub fn to_config(&self) -> PullPushConfig {
        PullPushConfig {
            alpha: self.alpha,
            lambda: self.lambda,
            period: match self.qsr {
                Some(q) => CommPeriod::Qsr(q),
                None => CommPeriod::Fixed(self.tau),
            },
            consensus: self.consensus,
            push: self.push,
            lambda_schedule: self.lambda_schedule,
        }
    }
}

impl ObjectiveSpec {
    pub fn build(&self) -> ppsim_core::Result<Box<dyn Objective>> {
        Ok(match self {
            ObjectiveSpec::Quadratic(q) => {
                let obj = match (&q.curvatures, q.dim) {
                    (Some(c), _) => {
                        let center = q.center.clone().unwrap_or_else(|| vec![0.0; c.len()]);
                        QuadraticObjective::new(c.clone(), center, q.f0)?
                    }
                    (None, Some(dim)) => {
                        let mut rng = RngStream::new(q.data_seed, DATA_STREAM);
                        let obj = QuadraticObjective::random(dim, q.curvature_min, q.curvature_max, q.f0, &mut rng)?;
                        match &q.center {
                            Some(c) => QuadraticObjective::new(obj.curvatures().to_vec(), c.clone(), q.f0)?,
                            None => obj,
                        }
                    }
                    (None, None) => {
                        return Err(ppsim_core::Error::InvalidConfig(
                            "quadratic objective needs `curvatures` or `dim`".into(),
                        ))
                    }
                };
                Box::new(obj.with_init_scale(q.init_scale))
            }
            ObjectiveSpec::MultiBasin(m) => Box::new(MultiBasinObjective::new(m.basins.clone(), m.temperature)?),
            ObjectiveSpec::Mlp(cfg) => Box::new(MlpObjective::generate(cfg)?),
        })
    }
}

impl ExperimentConfig {
    pub fn train_config(&self, threads: usize) -> TrainConfig {
        TrainConfig {
            workers: self.workers,
            pp: self.pullpush.to_config(),
            opt: self.optimizer,
            noise: self.noise,
            total_iters: self.total_iters,
            seed: self.seed,
            threads,
            independent_init: self.independent_init,
            average_momentum: self.average_momentum,
        }
    }
}

/// Parses the value side of an override as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `a.b.c=value` override in place.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key.path=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override `{spec}` has an empty key");
    }
    let mut table = doc;
    for k in &keys[..keys.len() - 1] {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{spec}`: `{k}` is not a table"))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut doc: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: ExperimentConfig = toml::Value::Table(doc).try_into().context("invalid config")?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text, overrides).with_context(|| format!("in {}", path.display()))
}
