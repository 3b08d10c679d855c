//! Quantile-of-estimators (QoE) robustification.
//!
//! The sample is split into `k` blocks of equal size, a base estimator is
//! applied to every block, and a quantile of the `k` block estimates is
//! returned. Two quantile families are supported:
//!
//! * component-wise quantiles ([`quantile`]), applied coordinate by
//!   coordinate or point-wise along a time grid;
//! * geometric (spatial) quantiles ([`geometry`]), the minimisers of
//!   `Σ‖x_i − y‖ + ⟨u, x_i − y⟩` for a direction `‖u‖ < 1`.
//!
//! [`qoe`] assembles the estimator pipeline together with block partitions,
//! base estimators and adversarial contamination. [`asymptotics`] provides
//! closed-form limit covariances and concentration bounds used as ground
//! truth by the experiment harness.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod qoe;
pub mod quantile;

pub use error::{QoeError, Result};
pub use quantile::{AlphaVector, PathSet, PointSet};
