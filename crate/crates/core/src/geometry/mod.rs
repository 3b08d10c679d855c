//! Geometric (spatial) quantiles in Euclidean space.
//!
//! For points `x_1..x_k ∈ R^d` and a direction `u` with `‖u‖ < 1` the
//! geometric quantile minimises
//!
//! ```text
//! F(y) = Σ_i ‖x_i − y‖ + ⟨u, x_i − y⟩.
//! ```
//!
//! `u = 0` gives the geometric median. When the points are collinear and `u`
//! is parallel to their line the minimiser may be an interval, and the
//! univariate `q_α` of the line coordinates is returned instead, with
//! `α = (⟨u, h⟩ + 1)/2` for the unit line direction `h`.

mod adjust;
mod collinear;
mod l1;
mod solver;
pub(crate) mod vecops;

pub use adjust::adjusted_parameter;
pub use collinear::{collinearity_test, triangle_area, uniqueness_predicate, LineFit};
pub use l1::{l1_geometric_quantile, L1Quantile};
pub use solver::{
    first_order_residual, geometric_quantile, objective, optimality_gap, GeoQuantileResult,
    SolveStatus, SolverOptions,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Quantile direction `u` with Euclidean norm strictly below one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileDirection(Vec<f64>);

impl QuantileDirection {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return invalid("quantile direction is empty");
        }
        crate::quantile::check_finite(&u)?;
        let n = vecops::norm(&u);
        if n >= 1.0 {
            return invalid(format!("quantile direction has norm {n} ≥ 1"));
        }
        Ok(Self(u))
    }

    /// The geometric median direction in `d` dimensions.
    pub fn zero(d: usize) -> Self {
        Self(vec![0.0; d.max(1)])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        vecops::norm(&self.0)
    }
}

impl TryFrom<Vec<f64>> for QuantileDirection {
    type Error = crate::QoeError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantileDirection> for Vec<f64> {
    fn from(u: QuantileDirection) -> Self {
        u.0
    }
}
