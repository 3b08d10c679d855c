use super::vecops::{dist, dot, norm, sub};
use crate::quantile::PointSet;

/// Parametrisation of a set of (numerically) collinear points as
/// `x_i ≈ origin + coordinates[i] · direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    pub origin: Vec<f64>,
    /// Unit vector whose first nonzero coordinate is positive.
    pub direction: Vec<f64>,
    pub coordinates: Vec<f64>,
    /// `max_i ‖x_i − (origin + coordinates[i]·direction)‖`.
    pub reconstruction_error: f64,
}

impl LineFit {
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.direction)
            .map(|(o, h)| o + t * h)
            .collect()
    }
}

/// Area of the triangle with side lengths `a, b, c`, using Kahan's
/// rearrangement of Heron's formula (stable for needle-like triangles).
pub fn triangle_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * prod.max(0.0).sqrt()
}

/// Returns a [`LineFit`] when the summed area of all triangles spanned by the
/// points is at most `tol · scale²`, where `scale` is the largest pairwise
/// distance. Sets of one or two points are always collinear.
pub fn collinearity_test(points: &PointSet, tol: f64) -> Option<LineFit> {
    let k = points.len();
    let d = points.dim();

    if k > 2 && clearly_not_collinear(points, tol) {
        return None;
    }

    let mut scale = 0.0;
    let mut far = (0, 0);
    for i in 0..k {
        for j in i + 1..k {
            let r = dist(points.point(i), points.point(j));
            if r > scale {
                scale = r;
                far = (i, j);
            }
        }
    }

    if k > 2 && scale > 0.0 {
        let threshold = tol * scale * scale;
        let mut total = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    total += spanned_area(points.point(i), points.point(j), points.point(l));
                    if total > threshold {
                        return None;
                    }
                }
            }
        }
    }

    let mut direction = vec![0.0; d];
    if scale > 0.0 {
        direction = sub(points.point(far.1), points.point(far.0));
        let n = norm(&direction);
        direction.iter_mut().for_each(|v| *v /= n);
        if let Some(first) = direction.iter().find(|v| **v != 0.0) {
            if *first < 0.0 {
                direction.iter_mut().for_each(|v| *v = -*v);
            }
        }
    } else {
        direction[0] = 1.0;
    }

    let mut origin = vec![0.0; d];
    for p in points.iter() {
        for (o, x) in origin.iter_mut().zip(p) {
            *o += x;
        }
    }
    origin.iter_mut().for_each(|o| *o /= k as f64);

    let coordinates: Vec<f64> = points
        .iter()
        .map(|p| dot(&sub(p, &origin), &direction))
        .collect();
    let mut fit = LineFit {
        origin,
        direction,
        coordinates,
        reconstruction_error: 0.0,
    };
    fit.reconstruction_error = points
        .iter()
        .zip(&fit.coordinates)
        .map(|(p, &t)| dist(p, &fit.point_at(t)))
        .fold(0.0, f64::max);
    Some(fit)
}

/// Distance from `p` to the line through `a` with unit direction `h`,
/// taken as the norm of the residual (no cancellation for near-collinear
/// points).
fn distance_to_line(p: &[f64], a: &[f64], h: &[f64]) -> f64 {
    let w = sub(p, a);
    let t = dot(&w, h);
    w.iter()
        .zip(h)
        .map(|(wl, hl)| (wl - t * hl).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Area of the triangle spanned by three points: half the longest side
/// times the distance of the opposite vertex from it. Side lengths lose the
/// area of needle-like triangles to rounding, coordinates do not.
fn spanned_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let sides = [(dist(a, b), a, b, c), (dist(a, c), a, c, b), (dist(b, c), b, c, a)];
    let (len, p, q, opposite) = sides
        .into_iter()
        .fold(sides[0], |acc, s| if s.0 > acc.0 { s } else { acc });
    if len == 0.0 {
        return 0.0;
    }
    let h: Vec<f64> = sub(q, p).iter().map(|v| v / len).collect();
    0.5 * len * distance_to_line(opposite, p, &h)
}

/// O(k) rejection. With `a` the point farthest from `x_0` (distance `r`),
/// every point lies within `r` of `x_0`, so `r ≤ scale ≤ 2r`. A point at
/// distance `δ` from the line through `x_0` and `a` spans a triangle of area
/// `rδ/2` with them; if that alone exceeds `tol·(2r)²` the full triangle sum
/// exceeds `tol·scale²` too.
fn clearly_not_collinear(points: &PointSet, tol: f64) -> bool {
    let x0 = points.point(0);
    let (ia, r) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, dist(p, x0)))
        .fold((0, 0.0), |acc, b| if b.1 > acc.1 { b } else { acc });
    if r == 0.0 {
        return false;
    }
    let h: Vec<f64> = sub(points.point(ia), x0).iter().map(|v| v / r).collect();
    let bound = tol * 4.0 * r * r;
    points.iter().any(|p| 0.5 * r * distance_to_line(p, x0, &h) > bound)
}

/// Sufficient condition for a unique geometric quantile: the points are not
/// collinear, or `‖u‖ ∉ {1 − 2j/k : j = 1..⌊k/2⌋}`.
pub fn uniqueness_predicate(k: usize, u_norm: f64, collinear: bool) -> bool {
    if !collinear {
        return true;
    }
    // ‖u‖ = 1 − 2j/k  ⇔  k(1 − ‖u‖) = 2j
    let scaled = k as f64 * (1.0 - u_norm);
    let nearest = (scaled / 2.0).round();
    let hit = (scaled - 2.0 * nearest).abs() <= 8.0 * f64::EPSILON * scaled.max(1.0);
    let j = nearest as i64;
    !(hit && j >= 1 && j as usize <= k / 2)
}
