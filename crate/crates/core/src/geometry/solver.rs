//! Weiszfeld-type fixed point for the geometric quantile.
//!
//! Off the data points the objective is smooth and its stationarity
//! condition `Σ (x_i − y)/‖x_i − y‖ + k·u = 0` rearranges to the fixed point
//!
//! ```text
//! y ← (Σ_i x_i/‖x_i − y‖ + k·u) / Σ_i 1/‖x_i − y‖,
//! ```
//!
//! a majorise-minimise step that never increases the objective. At a data
//! point `x_j` of multiplicity `m` the subgradient test
//! `‖Σ_{x_i ≠ x_j} (x_i − x_j)/‖x_i − x_j‖ + k·u‖ ≤ m` decides whether `x_j`
//! is the minimiser; if it is not, the iterate escapes along the surplus
//! vector. Newton steps on the smooth objective are interleaved to reach
//! tight residuals quickly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::collinear::{collinearity_test, uniqueness_predicate};
use super::vecops::{dist, dot, norm};
use super::QuantileDirection;
use crate::error::{invalid, QoeError, Result};
use crate::quantile::{order_indices, quantile_of_sorted, sorted_copy, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Converged when the first-order residual is at most `residual_tol · k`.
    pub residual_tol: f64,
    /// Stall threshold for a fixed-point step, relative to the robust data scale.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of [`collinearity_test`].
    pub collinearity_tol: f64,
    /// Distance (relative to the robust scale) below which an iterate sits on a data point.
    pub anchor_tol: f64,
    /// Escape displacement (relative to the robust scale) off a rejected anchor.
    pub escape: f64,
    /// Every data point is tested as a candidate anchor up front when `k` is
    /// at most this many points.
    pub anchor_scan_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            step_tol: 1e-12,
            max_iter: 100_000,
            collinearity_tol: 1e-10,
            anchor_tol: 1e-12,
            escape: 1e-6,
            anchor_scan_limit: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Stationary point off the data.
    Interior,
    /// The minimiser is the data point with this index.
    Anchored(usize),
    /// Collinear data with `u` parallel to the line; `q_α` of the line
    /// coordinates. `unique` is false when the minimiser set is an interval.
    CollinearFallback { unique: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoQuantileResult {
    pub point: Vec<f64>,
    /// `k + 1` simplex weights; the last one multiplies `u`.
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl GeoQuantileResult {
    /// `(Σ w_i x_i + w_{k+1} u) / (1 − w_{k+1})`.
    pub fn reconstruct(&self, points: &PointSet, u: &QuantileDirection) -> Vec<f64> {
        let k = points.len();
        let wu = self.weights[k];
        let mut y: Vec<f64> = u.as_slice().iter().map(|v| wu * v).collect();
        for (p, w) in points.iter().zip(&self.weights) {
            for (yl, xl) in y.iter_mut().zip(p) {
                *yl += w * xl;
            }
        }
        y.iter_mut().for_each(|v| *v /= 1.0 - wu);
        y
    }
}

/// `Σ_i ‖x_i − y‖ + ⟨u, x_i − y⟩`.
pub fn objective(points: &PointSet, y: &[f64], u: &[f64]) -> f64 {
    points
        .iter()
        .map(|x| {
            let mut sq = 0.0;
            let mut lin = 0.0;
            for ((xl, yl), ul) in x.iter().zip(y).zip(u) {
                let diff = xl - yl;
                sq += diff * diff;
                lin += ul * diff;
            }
            sq.sqrt() + lin
        })
        .sum()
}

/// `‖Σ_i (x_i − y)/‖x_i − y‖ + k·u‖`; `y` must differ from every data point.
pub fn first_order_residual(points: &PointSet, y: &[f64], u: &QuantileDirection) -> Result<f64> {
    check_dims(points, u)?;
    if y.len() != points.dim() {
        return invalid("evaluation point has the wrong dimension");
    }
    if points.iter().any(|x| dist(x, y) == 0.0) {
        return invalid("evaluation point coincides with a data point; use the anchor test");
    }
    Ok(smooth_residual(points, y, u.as_slice()))
}

/// Distance of the subdifferential at `y` from zero: the first-order residual
/// off the data, `max(0, ‖surplus‖ − m)` on a data point of multiplicity `m`.
pub fn optimality_gap(points: &PointSet, y: &[f64], u: &QuantileDirection) -> f64 {
    let scale = local_scale(points).max(f64::MIN_POSITIVE);
    gap_at(points, y, u.as_slice(), 1e-12 * scale)
}

fn check_dims(points: &PointSet, u: &QuantileDirection) -> Result<()> {
    if u.dim() != points.dim() {
        return invalid(format!(
            "direction has dimension {} but points have dimension {}",
            u.dim(),
            points.dim()
        ));
    }
    Ok(())
}

fn smooth_residual(points: &PointSet, y: &[f64], u: &[f64]) -> f64 {
    let k = points.len() as f64;
    let mut g: Vec<f64> = u.iter().map(|v| k * v).collect();
    for x in points.iter() {
        let r = dist(x, y);
        for ((gl, xl), yl) in g.iter_mut().zip(x).zip(y) {
            *gl += (xl - yl) / r;
        }
    }
    norm(&g)
}

/// Surplus vector and multiplicity at `y`: points within `tie` of `y` count
/// towards the multiplicity, the rest contribute unit vectors.
fn surplus(points: &PointSet, y: &[f64], u: &[f64], tie: f64) -> (Vec<f64>, usize) {
    let k = points.len() as f64;
    let mut g: Vec<f64> = u.iter().map(|v| k * v).collect();
    let mut m = 0;
    for x in points.iter() {
        let r = dist(x, y);
        if r <= tie {
            m += 1;
            continue;
        }
        for ((gl, xl), yl) in g.iter_mut().zip(x).zip(y) {
            *gl += (xl - yl) / r;
        }
    }
    (g, m)
}

fn gap_at(points: &PointSet, y: &[f64], u: &[f64], tie: f64) -> f64 {
    let (g, m) = surplus(points, y, u, tie);
    (norm(&g) - m as f64).max(0.0)
}

fn bounding_scale(points: &PointSet) -> f64 {
    let d = points.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points.iter() {
        for l in 0..d {
            lo[l] = lo[l].min(p[l]);
            hi[l] = hi[l].max(p[l]);
        }
    }
    dist(&lo, &hi)
}

/// Robust length scale of the bulk of the data: the median distance to the
/// coordinate-wise median, or the smallest positive such distance when more
/// than half of the points coincide. Tolerances near the solution use this
/// rather than [`bounding_scale`], which a few distant points can inflate by
/// many orders of magnitude.
fn local_scale(points: &PointSet) -> f64 {
    let centre: Vec<f64> = (0..points.dim())
        .map(|l| quantile_of_sorted(&sorted_copy(&points.coordinate(l)), 0.5))
        .collect();
    let radii = sorted_copy(&points.iter().map(|x| dist(x, &centre)).collect::<Vec<_>>());
    let med = quantile_of_sorted(&radii, 0.5);
    if med > 0.0 {
        med
    } else {
        radii.into_iter().find(|&r| r > 0.0).unwrap_or(0.0)
    }
}

/// Weights and residual reported for a final point.
fn finalize(
    points: &PointSet,
    y: Vec<f64>,
    u: &[f64],
    tie: f64,
    iterations: usize,
    status: SolveStatus,
) -> GeoQuantileResult {
    let k = points.len();
    let coincident: Vec<usize> = (0..k)
        .filter(|&i| dist(points.point(i), &y) <= tie)
        .collect();
    let mut weights = vec![0.0; k + 1];
    let residual;
    if coincident.is_empty() {
        let inv: Vec<f64> = points.iter().map(|x| 1.0 / dist(x, &y)).collect();
        let denom = inv.iter().sum::<f64>() + k as f64;
        for (w, iv) in weights.iter_mut().zip(&inv) {
            *w = iv / denom;
        }
        weights[k] = k as f64 / denom;
        residual = smooth_residual(points, &y, u);
    } else {
        let share = 1.0 / coincident.len() as f64;
        for &i in &coincident {
            weights[i] = share;
        }
        residual = gap_at(points, &y, u, tie);
    }
    GeoQuantileResult {
        point: y,
        weights,
        residual,
        iterations,
        status,
    }
}

/// Computes a geometric quantile of `points` in direction `u`.
pub fn geometric_quantile(
    points: &PointSet,
    u: &QuantileDirection,
    opts: SolverOptions,
) -> Result<GeoQuantileResult> {
    check_dims(points, u)?;
    let k = points.len();
    let d = points.dim();
    let uv = u.as_slice();
    let scale = bounding_scale(points);
    let local = local_scale(points);
    let tie = opts.anchor_tol * local;

    if scale == 0.0 {
        // All points coincide; |⟨u, z⟩| < ‖z‖ makes that point the minimiser.
        return Ok(finalize(points, points.point(0).to_vec(), uv, 0.0, 0, SolveStatus::Anchored(0)));
    }

    if let Some(fit) = collinearity_test(points, opts.collinearity_tol) {
        let along = dot(uv, &fit.direction);
        let off_line: f64 = uv
            .iter()
            .zip(&fit.direction)
            .map(|(ul, hl)| (ul - along * hl).powi(2))
            .sum::<f64>()
            .sqrt();
        // With a component of u orthogonal to the line the minimiser leaves
        // the line and is unique; the iteration below handles that case.
        if off_line <= 1e-12 {
            let alpha = (along + 1.0) / 2.0;
            let unique = uniqueness_predicate(k, along.abs(), true);
            // The two order statistics are data points; averaging them (rather
            // than mapping q_α back through the fit) returns data exactly.
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| fit.coordinates[a].total_cmp(&fit.coordinates[b]));
            let (lo, hi) = order_indices(k, alpha);
            let (a, b) = (points.point(order[lo - 1]), points.point(order[hi - 1]));
            let y: Vec<f64> = if lo == hi {
                a.to_vec()
            } else {
                a.iter().zip(b).map(|(al, bl)| 0.5 * (al + bl)).collect()
            };
            let tie_line = tie.max(8.0 * f64::EPSILON * scale) + fit.reconstruction_error;
            return Ok(finalize(
                points,
                y,
                uv,
                tie_line,
                0,
                SolveStatus::CollinearFallback { unique },
            ));
        }
    }

    if k <= opts.anchor_scan_limit {
        for j in 0..k {
            let xj = points.point(j);
            if (0..j).any(|i| dist(points.point(i), xj) <= tie) {
                continue;
            }
            let (g, m) = surplus(points, xj, uv, tie);
            if norm(&g) <= m as f64 {
                return Ok(finalize(points, xj.to_vec(), uv, tie, 0, SolveStatus::Anchored(j)));
            }
        }
    }

    let res_tol = opts.residual_tol * k as f64;
    let mut y = vec![0.0; d];
    for p in points.iter() {
        for (yl, xl) in y.iter_mut().zip(p) {
            *yl += xl / k as f64;
        }
    }
    let mut best = (f64::INFINITY, y.clone(), f64::INFINITY);

    let mut num = vec![0.0; d];
    for iter in 1..=opts.max_iter {
        let (jmin, dmin) = points
            .iter()
            .enumerate()
            .map(|(i, x)| (i, dist(x, &y)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if dmin <= tie {
            let xj = points.point(jmin).to_vec();
            let (g, m) = surplus(points, &xj, uv, tie);
            let gn = norm(&g);
            if gn <= m as f64 {
                return Ok(finalize(points, xj, uv, tie, iter, SolveStatus::Anchored(jmin)));
            }
            y = xj
                .iter()
                .zip(&g)
                .map(|(x, gl)| x + gl / gn * opts.escape * local)
                .collect();
            continue;
        }

        let residual = smooth_residual(points, &y, uv);
        let f = objective(points, &y, uv);
        if f < best.0 {
            best = (f, y.clone(), residual);
        }
        if residual <= res_tol {
            return Ok(finalize(points, y, uv, tie, iter, SolveStatus::Interior));
        }

        num.iter_mut().for_each(|v| *v = 0.0);
        let mut s = 0.0;
        for x in points.iter() {
            let w = 1.0 / dist(x, &y);
            s += w;
            for (nl, xl) in num.iter_mut().zip(x) {
                *nl += w * xl;
            }
        }
        let next: Vec<f64> = num
            .iter()
            .zip(uv)
            .map(|(nl, ul)| (nl + k as f64 * ul) / s)
            .collect();
        let step = dist(&next, &y);
        y = next;

        if step <= opts.step_tol * local || iter % 50 == 0 {
            if let Some((polished, r)) = newton_polish(points, &y, uv, res_tol, tie) {
                if r <= res_tol {
                    return Ok(finalize(points, polished, uv, tie, iter, SolveStatus::Interior));
                }
                y = polished;
            } else if step <= opts.step_tol * local {
                // Stalled next to a data point: decide with the anchor test.
                let xj = points.point(jmin).to_vec();
                let (g, m) = surplus(points, &xj, uv, tie);
                if norm(&g) <= m as f64 {
                    return Ok(finalize(points, xj, uv, tie, iter, SolveStatus::Anchored(jmin)));
                }
            }
        }
    }

    Err(QoeError::NonConvergence {
        best: best.1,
        residual: best.2,
        iterations: opts.max_iter,
    })
}

/// Damped Newton iterations on the smooth objective. Returns the improved
/// point and its residual, or `None` if no step decreased the objective.
fn newton_polish(
    points: &PointSet,
    start: &[f64],
    u: &[f64],
    res_tol: f64,
    tie: f64,
) -> Option<(Vec<f64>, f64)> {
    let d = start.len();
    let k = points.len() as f64;
    let mut y = start.to_vec();
    let mut f = objective(points, &y, u);
    let mut improved = false;
    for _ in 0..30 {
        let mut h = DMatrix::<f64>::zeros(d, d);
        let mut g = DVector::<f64>::from_iterator(d, u.iter().map(|v| k * v));
        for x in points.iter() {
            let r = dist(x, &y);
            if r <= tie {
                return improved.then(|| {
                    let res = smooth_residual(points, &y, u);
                    (y, res)
                });
            }
            let e: Vec<f64> = x.iter().zip(&y).map(|(xl, yl)| (xl - yl) / r).collect();
            for a in 0..d {
                g[a] += e[a];
                for b in 0..d {
                    let id = if a == b { 1.0 } else { 0.0 };
                    h[(a, b)] += (id - e[a] * e[b]) / r;
                }
            }
        }
        if g.norm() <= res_tol {
            break;
        }
        // ∇F = −g, so the Newton step solves H·Δ = g.
        let chol = h.cholesky()?;
        let delta = chol.solve(&g);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand: Vec<f64> = y.iter().zip(delta.iter()).map(|(yl, dl)| yl + t * dl).collect();
            let fc = objective(points, &cand, u);
            if fc <= f {
                y = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        improved = true;
    }
    if !improved {
        return None;
    }
    if points.iter().any(|x| dist(x, &y) <= tie) {
        return None;
    }
    let res = smooth_residual(points, &y, u);
    Some((y, res))
}
