use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::partition::BlockPartition;
use crate::error::{invalid, Result};
use crate::quantile::{check_alpha, quantile_of_sorted, PointSet};

/// Estimator applied to each block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseEstimator {
    /// Column means.
    Mean,
    /// Least squares of column `response` on the `regressors` columns (no
    /// implicit intercept). Rank-deficient blocks get the minimum-norm
    /// solution and are flagged.
    Ols {
        response: usize,
        regressors: Vec<usize>,
    },
    /// Per column, the U-statistic with kernel `h(x1, x2) = (x1 − x2)²/2`.
    Variance,
    /// Per column, `q_α` of the block.
    SampleQuantile { alpha: f64 },
}

impl BaseEstimator {
    pub fn output_dim(&self, data_cols: usize) -> usize {
        match self {
            Self::Ols { regressors, .. } => regressors.len(),
            _ => data_cols,
        }
    }

    fn validate(&self, data_cols: usize, block_len: usize) -> Result<()> {
        if block_len == 0 {
            return invalid("blocks are empty");
        }
        match self {
            Self::Mean => Ok(()),
            Self::Variance if block_len < 2 => invalid("the variance U-statistic needs blocks of at least 2 rows"),
            Self::Variance => Ok(()),
            Self::SampleQuantile { alpha } => check_alpha(*alpha),
            Self::Ols { response, regressors } => {
                if regressors.is_empty() {
                    return invalid("OLS needs at least one regressor column");
                }
                if let Some(c) = std::iter::once(response).chain(regressors).find(|&&c| c >= data_cols) {
                    return invalid(format!("column {c} out of range for {data_cols} columns"));
                }
                Ok(())
            }
        }
    }

    /// Applies the estimator to `rows` (row-major, `cols` columns). Returns
    /// the estimate and a rank-deficiency flag.
    pub fn estimate(&self, rows: &[f64], cols: usize) -> Result<(Vec<f64>, bool)> {
        let m = rows.len() / cols;
        self.validate(cols, m)?;
        Ok(match self {
            Self::Mean => {
                let mut out = vec![0.0; cols];
                for r in rows.chunks_exact(cols) {
                    for (o, v) in out.iter_mut().zip(r) {
                        *o += v;
                    }
                }
                out.iter_mut().for_each(|o| *o /= m as f64);
                (out, false)
            }
            Self::Variance => {
                // Σ_{i<j} (x_i − x_j)²/2 / C(m,2) equals the unbiased sample variance.
                let out = (0..cols)
                    .map(|c| {
                        let mean = rows.chunks_exact(cols).map(|r| r[c]).sum::<f64>() / m as f64;
                        rows.chunks_exact(cols).map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (m - 1) as f64
                    })
                    .collect();
                (out, false)
            }
            Self::SampleQuantile { alpha } => {
                let out = (0..cols)
                    .map(|c| {
                        let mut col: Vec<f64> = rows.chunks_exact(cols).map(|r| r[c]).collect();
                        col.sort_by(f64::total_cmp);
                        quantile_of_sorted(&col, *alpha)
                    })
                    .collect();
                (out, false)
            }
            Self::Ols { response, regressors } => {
                let p = regressors.len();
                let x = DMatrix::from_fn(m, p, |i, j| rows[i * cols + regressors[j]]);
                let y = DVector::from_fn(m, |i, _| rows[i * cols + response]);
                ols_min_norm(x, y)?
            }
        })
    }
}

fn ols_min_norm(x: DMatrix<f64>, y: DVector<f64>) -> Result<(Vec<f64>, bool)> {
    let (m, p) = x.shape();
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * m.max(p) as f64 * f64::EPSILON * 16.0;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let beta = svd
        .solve(&y, eps)
        .map_err(|e| crate::QoeError::Numerical(format!("least squares failed: {e}")))?;
    Ok((beta.iter().copied().collect(), rank < p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimates {
    /// Row `i` is the estimate from block `i`.
    pub values: PointSet,
    pub degenerate: Vec<bool>,
}

pub fn block_estimates(
    data: &Dataset,
    est: &BaseEstimator,
    partition: &BlockPartition,
) -> Result<BlockEstimates> {
    if partition.n != data.n() {
        return invalid("partition does not match the dataset size");
    }
    if partition.block_len == 0 {
        return invalid("block size is zero");
    }
    let out_d = est.output_dim(data.d());
    let mut flat = Vec::with_capacity(partition.k * out_d);
    let mut degenerate = Vec::with_capacity(partition.k);
    for range in partition.blocks() {
        let (v, deg) = est.estimate(data.block(range), data.d())?;
        flat.extend(v);
        degenerate.push(deg);
    }
    Ok(BlockEstimates {
        values: PointSet::from_flat(flat, out_d)?,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qoe::partition::partition;

    #[test]
    fn mean_of_constant_blocks() {
        let data = Dataset::from_column(vec![4.25; 30]).unwrap();
        let be = block_estimates(&data, &BaseEstimator::Mean, &partition(30, 3).unwrap()).unwrap();
        assert!(be.values.iter().all(|r| r == [4.25]));
        assert_eq!(be.degenerate, vec![false; 3]);
    }

    #[test]
    fn variance_of_pair() {
        // single pair: h(0, 2) = (0 − 2)²/2 = 2
        let (v, _) = BaseEstimator::Variance.estimate(&[0.0, 2.0], 1).unwrap();
        assert_eq!(v, vec![2.0]);
        assert!(BaseEstimator::Variance.estimate(&[1.0], 1).is_err());
    }

    #[test]
    fn variance_matches_pairwise_kernel() {
        let x: [f64; 7] = [0.3, -1.2, 4.0, 2.5, 0.0, 7.75, -3.1];
        let m = x.len();
        let mut total = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                total += (x[i] - x[j]).powi(2) / 2.0;
            }
        }
        let pairs = (m * (m - 1) / 2) as f64;
        let (v, _) = BaseEstimator::Variance.estimate(&x, 1).unwrap();
        assert!((v[0] - total / pairs).abs() < 1e-12);
    }

    #[test]
    fn ols_recovers_exact_fit() {
        // y = 2·x1 − x2
        let rows: Vec<f64> = (0..6)
            .flat_map(|i| {
                let x1 = i as f64;
                let x2 = (i * i) as f64 * 0.5;
                [2.0 * x1 - x2, x1, x2]
            })
            .collect();
        let est = BaseEstimator::Ols { response: 0, regressors: vec![1, 2] };
        let (b, deg) = est.estimate(&rows, 3).unwrap();
        assert!(!deg);
        assert!((b[0] - 2.0).abs() < 1e-10 && (b[1] + 1.0).abs() < 1e-10, "{b:?}");
    }

    #[test]
    fn ols_duplicated_column_is_flagged() {
        let rows: Vec<f64> = (0..5).flat_map(|i| [3.0 * i as f64, i as f64, i as f64]).collect();
        let est = BaseEstimator::Ols { response: 0, regressors: vec![1, 2] };
        let (b, deg) = est.estimate(&rows, 3).unwrap();
        assert!(deg);
        assert!(b.iter().all(|v| v.is_finite()));
        // minimum-norm solution splits the coefficient evenly
        assert!((b[0] - 1.5).abs() < 1e-10 && (b[1] - 1.5).abs() < 1e-10, "{b:?}");
    }

    #[test]
    fn sample_quantile_per_column() {
        let rows = [1.0, 10.0, 3.0, 30.0, 2.0, 20.0];
        let (q, _) = BaseEstimator::SampleQuantile { alpha: 0.5 }.estimate(&rows, 2).unwrap();
        assert_eq!(q, vec![2.0, 20.0]);
    }

    #[test]
    fn ols_rejects_bad_columns() {
        let est = BaseEstimator::Ols { response: 0, regressors: vec![3] };
        assert!(est.estimate(&[1.0, 2.0], 2).is_err());
    }
}
