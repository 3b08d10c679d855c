use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quantile::{check_finite, level_is_integral, quantile_of_sorted, PointSet};

/// Geometric quantile under the ℓ1 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Quantile {
    pub point: Vec<f64>,
    /// `true` for coordinates whose minimiser set is a nondegenerate interval
    /// (`kα_l` integral); the midpoint `q_{α_l}` is reported there.
    pub non_unique: Vec<bool>,
}

impl L1Quantile {
    pub fn is_unique(&self) -> bool {
        !self.non_unique.iter().any(|&b| b)
    }
}

/// The ℓ1 objective separates over coordinates, so coordinate `l` is the
/// univariate geometric quantile with `α_l = (u_l + 1)/2`.
pub fn l1_geometric_quantile(points: &PointSet, u: &[f64]) -> Result<L1Quantile> {
    if u.len() != points.dim() {
        return invalid("direction has the wrong dimension");
    }
    check_finite(u)?;
    if let Some(v) = u.iter().find(|v| v.abs() >= 1.0) {
        return invalid(format!("ℓ∞ direction component {v} has |u_l| ≥ 1"));
    }
    let k = points.len();
    let mut point = Vec::with_capacity(points.dim());
    let mut non_unique = Vec::with_capacity(points.dim());
    for (l, ul) in u.iter().enumerate() {
        let alpha = (ul + 1.0) / 2.0;
        let mut column = points.coordinate(l);
        column.sort_by(f64::total_cmp);
        point.push(quantile_of_sorted(&column, alpha));
        non_unique.push(level_is_integral(k, alpha));
    }
    Ok(L1Quantile { point, non_unique })
}

/// `Σ_i ‖x_i − y‖_1 + ⟨u, x_i − y⟩`.
#[cfg(test)]
pub(crate) fn l1_objective(points: &PointSet, y: &[f64], u: &[f64]) -> f64 {
    points
        .iter()
        .map(|x| {
            x.iter()
                .zip(y)
                .zip(u)
                .map(|((xl, yl), ul)| (xl - yl).abs() + ul * (xl - yl))
                .sum::<f64>()
        })
        .sum()
}
