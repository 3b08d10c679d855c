//! Re-parametrisation that keeps a geometric quantile fixed when a few
//! points are replaced.

use super::vecops::{dist, norm};
use super::QuantileDirection;
use crate::error::{invalid, QoeError, Result};
use crate::quantile::PointSet;

/// Given a geometric quantile `x_star` of `original` with direction `u`, and
/// `modified` equal to `original` except in its first `p` points, returns
/// `v` such that `x_star` is a geometric quantile of `modified` with
/// direction `v`:
///
/// ```text
/// v = 2p/(2p + m) · ( u·m/(2p) − (1/k) Σ_{j: x̃_j ≠ x*} g_j ),   p ≥ 1
/// v = u,                                                      p = 0
/// ```
///
/// where `m = |{i: x̃_i = x*}|` and `g_j = (x̃_j − x*)/‖x̃_j − x*‖` is the
/// gradient of the norm at `x̃_j − x*`. Then `‖v − u‖ ≤ 2p/k` and `‖v‖ < 1`.
/// `p` must satisfy `p < k(1 − ‖u‖)/2`.
pub fn adjusted_parameter(
    original: &PointSet,
    modified: &PointSet,
    x_star: &[f64],
    u: &QuantileDirection,
) -> Result<QuantileDirection> {
    let k = original.len();
    let d = original.dim();
    if modified.len() != k || modified.dim() != d {
        return invalid("original and modified point sets differ in shape");
    }
    if x_star.len() != d || u.dim() != d {
        return invalid("quantile or direction has the wrong dimension");
    }

    let p = (0..k)
        .rev()
        .find(|&i| original.point(i) != modified.point(i))
        .map_or(0, |i| i + 1);
    if p == 0 {
        return Ok(u.clone());
    }
    let limit = k as f64 * (1.0 - u.norm()) / 2.0;
    if p as f64 >= limit {
        return invalid(format!(
            "{p} modified points but at most p < k(1 − ‖u‖)/2 = {limit} are allowed"
        ));
    }

    let scale = original
        .iter()
        .chain(modified.iter())
        .map(|x| dist(x, x_star))
        .fold(0.0, f64::max);
    let tie = 1e-12 * scale;

    let mut m = 0usize;
    let mut gsum = vec![0.0; d];
    for x in modified.iter() {
        let r = dist(x, x_star);
        if r <= tie {
            m += 1;
            continue;
        }
        for ((g, xl), sl) in gsum.iter_mut().zip(x).zip(x_star) {
            *g += (xl - sl) / r;
        }
    }

    let two_p = 2.0 * p as f64;
    let lead = two_p / (two_p + m as f64);
    let v: Vec<f64> = u
        .as_slice()
        .iter()
        .zip(&gsum)
        .map(|(ul, gl)| lead * (ul * m as f64 / two_p - gl / k as f64))
        .collect();
    let vn = norm(&v);
    if !(vn < 1.0) {
        return Err(QoeError::Numerical(format!(
            "adjusted direction has norm {vn} ≥ 1; x_star is probably not a quantile of the original points"
        )));
    }
    QuantileDirection::new(v)
}
