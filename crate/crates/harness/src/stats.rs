//! Moment and regression helpers used when aggregating replications.
//!
//! Sums are pairwise so the result depends only on the order of the inputs,
//! which is the replication order.

use nalgebra::DMatrix;

pub fn pairwise_sum(x: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if x.len() <= LEAF {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(x: &[f64]) -> f64 {
    pairwise_sum(x) / x.len() as f64
}

/// Sample mean and unbiased covariance of equal-length rows.
pub fn mean_and_covariance(rows: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..d).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let denom = n.saturating_sub(1).max(1) as f64;
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let prods: Vec<f64> = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .collect();
            let v = pairwise_sum(&prods) / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    (means, cov)
}

/// Median, averaging the middle pair for even lengths.
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
