//! File formats: metrics and scan CSVs, run summaries, and parameter snapshots.
//!
//! A snapshot is a 16-byte little-endian header (`b"PPSV"`, version `u32`,
//! dim `u64`) followed by `dim` little-endian `f64` values, with a sidecar
//! `<file>.json` holding [`SnapshotMeta`].

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{Evaluation, InterpPoint, LandscapeGrid, Projection};
use crate::measures::LayerLayout;
use crate::objectives::Dataset;
use crate::param::ParamVector;
use crate::trainer::{RunMetrics, RunResult};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"PPSV";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_LEN: usize = 16;

pub const METRICS_HEADER: [&str; 9] = [
    "round",
    "iter",
    "worker_id",
    "loss",
    "consensus_distance",
    "pull_mag",
    "push_mag",
    "lambda_t",
    "tau_t",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Snapshot(format!("csv: {e}"))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Snapshot(format!("{}: {e}", path.display()))
}

/// Shortest round-trip text for a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row per worker per round.
pub fn write_metrics_csv<W: Write>(out: W, metrics: &RunMetrics) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in &metrics.rounds {
        for m in 0..r.losses.len() {
            w.write_record([
                r.round.to_string(),
                r.iter.to_string(),
                m.to_string(),
                fmt_f64(r.losses[m]),
                fmt_f64(r.consensus_distance),
                fmt_f64(r.pull_mag[m]),
                fmt_f64(r.push_mag[m]),
                fmt_f64(r.lambda_t),
                r.tau_t.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Snapshot(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_worker_losses: Vec<f64>,
    pub final_average_loss: f64,
    pub final_average_test_loss: Option<f64>,
    pub final_average_train_err: Option<f64>,
    pub final_average_test_err: Option<f64>,
    pub terminal_consensus_distance: Option<f64>,
    pub communication_volume: f64,
    pub rounds: usize,
    pub total_iters: usize,
    pub seed: u64,
    pub code_version: String,
    pub config: serde_json::Value,
}

impl RunSummary {
    pub fn new(result: &RunResult, config: serde_json::Value) -> Self {
        Self {
            final_worker_losses: result.terminal.worker_losses.clone(),
            final_average_loss: result.terminal.average_loss,
            final_average_test_loss: result.terminal.average_test_loss,
            final_average_train_err: result.terminal.average_train_err,
            final_average_test_err: result.terminal.average_test_err,
            terminal_consensus_distance: result.metrics.terminal_consensus_distance(),
            communication_volume: result.communication_volume,
            rounds: result.metrics.rounds.len(),
            total_iters: result.config.total_iters,
            seed: result.config.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub version: u32,
    pub dim: usize,
    /// Objective kind the parameters belong to.
    pub objective: String,
    /// Worker index, or `None` for the average.
    pub worker_id: Option<usize>,
    pub layout: Option<LayerLayout>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_snapshot(x: &ParamVector) -> Vec<u8> {
    let mut buf = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * x.dim());
    buf.extend_from_slice(&SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(x.dim() as u64).to_le_bytes());
    for v in x.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<ParamVector> {
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(Error::Snapshot("truncated header".into()));
    }
    if bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dim = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if (body.len() as u64) != dim.saturating_mul(8) {
        return Err(Error::Snapshot(format!(
            "header says {dim} values but body has {} bytes",
            body.len()
        )));
    }
    Ok(ParamVector::from(
        body.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect::<Vec<_>>(),
    ))
}

/// Writes the snapshot and its sidecar.
pub fn write_snapshot(path: &Path, x: &ParamVector, meta: &SnapshotMeta) -> Result<()> {
    if meta.dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: meta.dim,
            got: x.dim(),
        });
    }
    fs::write(path, encode_snapshot(x)).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_vec_pretty(meta).map_err(|e| Error::Snapshot(e.to_string()))?;
    fs::write(&side, json).map_err(|e| io_err(&side, e))
}

/// Reads a snapshot and, when present, its sidecar.
pub fn read_snapshot(path: &Path) -> Result<(ParamVector, Option<SnapshotMeta>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    let x = decode_snapshot(&bytes)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let text = fs::read(&side).map_err(|e| io_err(&side, e))?;
        let meta: SnapshotMeta = serde_json::from_slice(&text).map_err(|e| Error::Snapshot(e.to_string()))?;
        if meta.dim != x.dim() {
            return Err(Error::Snapshot(format!(
                "sidecar dim {} disagrees with snapshot dim {}",
                meta.dim,
                x.dim()
            )));
        }
        Some(meta)
    } else {
        None
    };
    Ok((x, meta))
}

fn eval_fields(e: &Evaluation) -> [String; 4] {
    [fmt_f64(e.train_loss), opt(e.test_loss), opt(e.train_err), opt(e.test_err)]
}

pub fn write_grid_csv<W: Write>(out: W, grid: &LandscapeGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "a", "b", "train_loss", "test_loss", "train_err", "test_err"])
        .map_err(csv_err)?;
    for n in &grid.nodes {
        let [tl, vl, te, ve] = eval_fields(&n.eval);
        w.write_record([n.i.to_string(), n.j.to_string(), fmt_f64(n.a), fmt_f64(n.b), tl, vl, te, ve])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn write_projections_csv<W: Write>(out: W, proj: &[Projection]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["worker_id", "a", "b", "residual"]).map_err(csv_err)?;
    for p in proj {
        w.write_record([p.worker_id.to_string(), fmt_f64(p.a), fmt_f64(p.b), fmt_f64(p.residual)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn write_interpolation_csv<W: Write>(out: W, curve: &[InterpPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "train_loss", "test_loss", "train_err", "test_err"])
        .map_err(csv_err)?;
    for p in curve {
        let [tl, vl, te, ve] = eval_fields(&p.eval);
        w.write_record([fmt_f64(p.alpha), tl, vl, te, ve]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Snapshot(e.to_string()))
}

/// `feature_0..feature_k,label,shard_id`; rows without a shard leave it blank.
pub fn write_dataset_csv<W: Write>(out: W, data: &Dataset, shards: &[Option<usize>]) -> Result<()> {
    if shards.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            got: shards.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..data.num_features).map(|k| format!("feature_{k}")).collect();
    header.push("label".into());
    header.push("shard_id".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, shard) in shards.iter().enumerate() {
        let mut row: Vec<String> = data.row(i).iter().map(|v| fmt_f64(*v)).collect();
        row.push(data.labels[i].to_string());
        row.push(shard.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Snapshot(e.to_string()))
}
