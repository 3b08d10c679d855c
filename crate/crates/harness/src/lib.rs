//! Monte Carlo experiments for the quantile-of-estimators library.
//!
//! Each experiment takes a serde-backed config, runs its replications in a
//! rayon pool with one RNG stream per replication, and returns an
//! [`ExperimentReport`] whose pass/fail flags can be recomputed from the
//! recorded statistics and tolerances.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod ks;
pub mod properties;
pub mod report;
pub mod rng;
pub mod stats;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use report::{Check, ExperimentReport, Tolerance};
