//! Desk-scale simulator for centralized data-parallel training with pull-push
//! consensus.
//!
//! Workers are simulated in-process. Between communication rounds each worker
//! runs local SGD (or SAM) on its own shard; at every round a coordinator pulls
//! workers toward a consensus variable and, optionally, pushes them away from
//! the worker average with a unit-normed force of strength `lambda`. The
//! asymptotic worker spread then settles at `lambda / alpha`.
//!
//! Module map:
//!
//! - [`param`], [`rng`]: vector arithmetic and counter-based random streams.
//! - [`objectives`]: quadratic, multi-basin and small-MLP loss surfaces.
//! - [`consensus`]: consensus variables, pull/push updates and schedules.
//! - [`trainer`]: the round-based training loop and its metrics.
//! - [`measures`]: flatness/sharpness measures and Kendall's tau.
//! - [`theory`]: numerical forms of the valley-width, PAC-Bayes and
//!   convergence results.
//! - [`landscape`]: 2-D projections, grid scans and interpolation scans.
//! - [`io`]: CSV/JSON/snapshot formats shared with the command-line tool.
//!
//! With the default `parallel` feature, worker loops, grid scans and Monte
//! Carlo measures run on rayon; without it everything runs sequentially and
//! produces bit-identical output.

pub mod consensus;
pub mod error;
pub mod exec;
pub mod io;
pub mod landscape;
pub mod measures;
pub mod objectives;
pub mod param;
pub mod rng;
pub mod theory;
pub mod trainer;

pub use error::{Error, Result};
pub use param::ParamVector;
pub use rng::RngStream;

/// Smallest gap norm treated as a valid direction.
pub const DEFAULT_EPS0: f64 = 1e-12;
