//! Univariate, component-wise and point-wise quantiles of finite samples.
//!
//! The univariate quantile is the two-order-statistic average
//!
//! ```text
//! q_α(x) = ½ (x̃_⌈kα⌉ + x̃_⌊kα+1⌋)
//! ```
//!
//! where `x̃` is `x` sorted increasingly (1-based indices). When `kα` is not
//! an integer both indices coincide; otherwise the two neighbouring order
//! statistics are averaged. No further interpolation is applied.
//!
//! `kα` is computed in floating point; products within a few ulps of an
//! integer are snapped to it so that e.g. `k = 10, α = 0.3` selects the
//! same order statistics as the exact rational product.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Quantile levels, one per coordinate (or grid point). A single level
/// broadcasts to every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return invalid("alpha vector is empty");
        }
        for &a in &alphas {
            check_alpha(a)?;
        }
        Ok(Self(alphas))
    }

    pub fn uniform(alpha: f64) -> Result<Self> {
        Self::new(vec![alpha])
    }

    pub fn median() -> Self {
        Self(vec![0.5])
    }

    /// Level for coordinate `l`, broadcasting a scalar.
    pub fn get(&self, l: usize) -> f64 {
        if self.0.len() == 1 {
            self.0[0]
        } else {
            self.0[l]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_broadcast(&self) -> bool {
        self.0.len() == 1
    }

    /// Checks that this vector can serve `len` coordinates.
    pub fn check_len(&self, len: usize) -> Result<()> {
        if self.0.len() == 1 || self.0.len() == len {
            Ok(())
        } else {
            invalid(format!(
                "alpha vector has length {} but {} coordinates are required",
                self.0.len(),
                len
            ))
        }
    }
}

impl TryFrom<Vec<f64>> for AlphaVector {
    type Error = crate::QoeError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlphaVector> for Vec<f64> {
    fn from(a: AlphaVector) -> Self {
        a.0
    }
}

/// `k` points of common dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    k: usize,
    d: usize,
}

impl PointSet {
    pub fn from_flat(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("point dimension must be at least 1");
        }
        if data.is_empty() {
            return invalid("point set is empty");
        }
        if !data.len().is_multiple_of(d) {
            return invalid(format!(
                "flat buffer of length {} is not a multiple of dimension {}",
                data.len(),
                d
            ));
        }
        check_finite(&data)?;
        let k = data.len() / d;
        Ok(Self { data, k, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("point set is empty");
        };
        let d = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return invalid(format!(
                    "point {i} has dimension {} but point 0 has dimension {d}",
                    r.len()
                ));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, d)
    }

    /// Scalar sample as a set of one-dimensional points.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Values of coordinate `l` across all points.
    pub fn coordinate(&self, l: usize) -> Vec<f64> {
        self.iter().map(|p| p[l]).collect()
    }

    /// Replaces point `i`; the new point must be finite and of dimension `d`.
    pub fn set_point(&mut self, i: usize, p: &[f64]) -> Result<()> {
        if p.len() != self.d {
            return invalid("replacement point has the wrong dimension");
        }
        check_finite(p)?;
        self.data[i * self.d..(i + 1) * self.d].copy_from_slice(p);
        Ok(())
    }

    /// Applies `y = scale · (x − shift)` to every point.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.d {
            return invalid("shift has the wrong dimension");
        }
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(j, &x)| scale * (x - shift[j % self.d]))
            .collect();
        Self::from_flat(data, self.d)
    }
}

/// `k` discretised paths over a common strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    grid: Vec<f64>,
    paths: PointSet,
}

impl PathSet {
    pub fn new(grid: Vec<f64>, paths: Vec<Vec<f64>>) -> Result<Self> {
        if grid.is_empty() {
            return invalid("time grid is empty");
        }
        check_finite(&grid)?;
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("time grid must be strictly increasing");
        }
        if let Some((i, p)) = paths.iter().enumerate().find(|(_, p)| p.len() != grid.len()) {
            return invalid(format!(
                "path {i} has {} values but the grid has {} points",
                p.len(),
                grid.len()
            ));
        }
        let paths = PointSet::from_rows(&paths)?;
        Ok(Self { grid, paths })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        self.paths.point(i)
    }

    pub fn as_points(&self) -> &PointSet {
        &self.paths
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        invalid(format!("quantile level {alpha} is not in (0, 1)"))
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => invalid(format!("non-finite value {} at position {i}", values[i])),
        None => Ok(()),
    }
}

/// `kα` snapped to the nearest integer when it is within rounding error of one.
pub(crate) fn scaled_level(k: usize, alpha: f64) -> f64 {
    let ka = k as f64 * alpha;
    let r = ka.round();
    if (ka - r).abs() <= 8.0 * f64::EPSILON * ka.max(1.0) {
        r
    } else {
        ka
    }
}

/// True when `kα` is an integer (after snapping), i.e. the univariate
/// geometric quantile is an interval rather than a point.
pub(crate) fn level_is_integral(k: usize, alpha: f64) -> bool {
    let ka = scaled_level(k, alpha);
    ka.fract() == 0.0
}

/// 1-based order-statistic indices `(⌈kα⌉, ⌊kα + 1⌋)`.
pub(crate) fn order_indices(k: usize, alpha: f64) -> (usize, usize) {
    let ka = scaled_level(k, alpha);
    let lo = ka.ceil() as usize;
    let hi = (ka + 1.0).floor() as usize;
    debug_assert!(lo >= 1 && hi <= k, "kα+1 ≤ k must hold for α < 1");
    (lo.clamp(1, k), hi.clamp(1, k))
}

pub(crate) fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `q_α` of an already sorted, finite, nonempty slice.
pub(crate) fn quantile_of_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let (lo, hi) = order_indices(sorted.len(), alpha);
    0.5 * (sorted[lo - 1] + sorted[hi - 1])
}

/// `q_α(x) = ½(x̃_⌈kα⌉ + x̃_⌊kα+1⌋)`.
pub fn univariate_quantile(x: &[f64], alpha: f64) -> Result<f64> {
    if x.is_empty() {
        return invalid("cannot take the quantile of an empty sample");
    }
    check_alpha(alpha)?;
    check_finite(x)?;
    Ok(quantile_of_sorted(&sorted_copy(x), alpha))
}

/// The smallest data point `x_i` with `|{j: x_j ≤ x_i}| ≥ kα` and
/// `|{j: x_j ≥ x_i}| ≥ k(1 − α)`. Always returns one of the inputs.
pub fn univariate_quantile_lower(x: &[f64], alpha: f64) -> Result<f64> {
    if x.is_empty() {
        return invalid("cannot take the quantile of an empty sample");
    }
    check_alpha(alpha)?;
    check_finite(x)?;
    let s = sorted_copy(x);
    let k = s.len();
    let ka = scaled_level(k, alpha);
    // count_le ≥ kα  ⇔ count_le ≥ ⌈kα⌉;  count_ge ≥ k − kα ⇔ count_ge ≥ ⌈k − kα⌉
    let need_le = ka.ceil() as usize;
    let need_ge = (k as f64 - ka).ceil() as usize;
    let mut i = 0;
    while i < k {
        let v = s[i];
        let mut j = i;
        while j + 1 < k && s[j + 1] == v {
            j += 1;
        }
        let count_le = j + 1;
        let count_ge = k - i;
        if count_le >= need_le && count_ge >= need_ge {
            return Ok(v);
        }
        i = j + 1;
    }
    // Unreachable: the ⌈kα⌉-th order statistic always qualifies.
    Ok(s[need_le.clamp(1, k) - 1])
}

/// Coordinate `l` of the result is `q_{α_l}` of coordinate `l` of the points.
pub fn componentwise_quantile(points: &PointSet, alpha: &AlphaVector) -> Result<Vec<f64>> {
    alpha.check_len(points.dim())?;
    let mut column = Vec::with_capacity(points.len());
    Ok((0..points.dim())
        .map(|l| {
            column.clear();
            column.extend(points.iter().map(|p| p[l]));
            column.sort_by(f64::total_cmp);
            quantile_of_sorted(&column, alpha.get(l))
        })
        .collect())
}

/// Point-wise quantile path: at grid point `t_j` the output is `q_{α_j}` of
/// the `k` path values at `t_j`.
pub fn pointwise_path_quantile(paths: &PathSet, alpha: &AlphaVector) -> Result<Vec<f64>> {
    alpha.check_len(paths.grid().len())?;
    componentwise_quantile(paths.as_points(), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_examples() {
        assert_eq!(univariate_quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(univariate_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.5);
        assert_eq!(
            univariate_quantile(&[10.0, 20.0, 30.0, 40.0, 50.0], 0.25).unwrap(),
            20.0
        );
    }

    #[test]
    fn integral_level_is_snapped() {
        // 10 · 0.3 = 3.0000000000000004 in floating point.
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(univariate_quantile(&x, 0.3).unwrap(), 3.5);
        assert_eq!(univariate_quantile_lower(&x, 0.3).unwrap(), 3.0);
    }

    #[test]
    fn lower_examples() {
        assert_eq!(univariate_quantile_lower(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.0);
        assert_eq!(univariate_quantile_lower(&[5.0], 0.9).unwrap(), 5.0);
        assert_eq!(univariate_quantile_lower(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
    }

    #[test]
    fn lower_with_ties() {
        let x = [2.0, 2.0, 2.0, 7.0];
        assert_eq!(univariate_quantile_lower(&x, 0.9).unwrap(), 7.0);
        assert_eq!(univariate_quantile_lower(&x, 0.5).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(univariate_quantile(&[], 0.5).is_err());
        assert!(univariate_quantile(&[1.0], 0.0).is_err());
        assert!(univariate_quantile(&[1.0], 1.0).is_err());
        assert!(univariate_quantile(&[1.0, f64::NAN], 0.5).is_err());
        assert!(univariate_quantile_lower(&[], 0.5).is_err());
        assert!(univariate_quantile_lower(&[1.0], -0.1).is_err());
        assert!(AlphaVector::new(vec![0.5, 1.0]).is_err());
        assert!(PointSet::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(PointSet::from_rows(&[vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn componentwise_examples() {
        let p = PointSet::from_rows(&[[1.0, 4.0], [2.0, 5.0], [3.0, 6.0]]).unwrap();
        assert_eq!(
            componentwise_quantile(&p, &AlphaVector::new(vec![0.5, 0.5]).unwrap()).unwrap(),
            vec![2.0, 5.0]
        );

        let same = PointSet::from_rows(&[[1.5, -2.0]; 6]).unwrap();
        let a = AlphaVector::new(vec![0.1, 0.8]).unwrap();
        assert_eq!(componentwise_quantile(&same, &a).unwrap(), vec![1.5, -2.0]);

        // k = 4: α = 0.25 gives kα = 1 → ½(x̃_1 + x̃_2); α = 0.75 gives kα = 3 → ½(x̃_3 + x̃_4).
        let p = PointSet::from_rows(&[[0.0, 0.0], [1.0, 10.0], [2.0, 20.0], [3.0, 30.0]]).unwrap();
        let a = AlphaVector::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(componentwise_quantile(&p, &a).unwrap(), vec![0.5, 25.0]);

        let wrong = AlphaVector::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert!(componentwise_quantile(&p, &wrong).is_err());
    }

    #[test]
    fn path_examples() {
        let grid = vec![0.0, 0.5, 1.0];
        let constant = PathSet::new(
            grid.clone(),
            vec![vec![1.0; 3], vec![2.0; 3], vec![3.0; 3]],
        )
        .unwrap();
        assert_eq!(
            pointwise_path_quantile(&constant, &AlphaVector::median()).unwrap(),
            vec![2.0; 3]
        );

        let single = PathSet::new(grid.clone(), vec![vec![0.3, -1.0, 8.0]]).unwrap();
        assert_eq!(
            pointwise_path_quantile(&single, &AlphaVector::uniform(0.37).unwrap()).unwrap(),
            vec![0.3, -1.0, 8.0]
        );

        let linear = PathSet::new(
            grid.clone(),
            (1..=5).map(|i| grid.iter().map(|t| i as f64 * t).collect()).collect(),
        )
        .unwrap();
        assert_eq!(
            pointwise_path_quantile(&linear, &AlphaVector::median()).unwrap(),
            vec![0.0, 1.5, 3.0]
        );

        assert!(PathSet::new(vec![0.0, 0.0], vec![vec![1.0, 2.0]]).is_err());
        assert!(PathSet::new(vec![0.0, 1.0], vec![vec![1.0]]).is_err());
        let a = AlphaVector::new(vec![0.5, 0.5]).unwrap();
        assert!(pointwise_path_quantile(&linear, &a).is_err());
    }

    #[test]
    fn alpha_vector_serde_validates() {
        let a: std::result::Result<AlphaVector, _> = AlphaVector::try_from(vec![0.2, 0.7]);
        assert!(a.is_ok());
        assert!(AlphaVector::try_from(vec![]).is_err());
    }
}
