//! Seeded property suites over the core quantile and geometry functions.
//!
//! Each suite draws `cases` random instances from its own RNG streams and
//! counts violations of an exact inequality or identity. Identities between
//! floating-point computations that take different paths are compared up to
//! a rounding-level tolerance, which each suite records.

use qoe_core::geometry::{geometric_quantile, QuantileDirection, SolverOptions};
use qoe_core::quantile::{
    componentwise_quantile, pointwise_path_quantile, univariate_quantile, univariate_quantile_lower,
};
use qoe_core::{AlphaVector, PathSet, PointSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    pub tolerance: f64,
}

type Case = fn(&mut ChaCha8Rng) -> Result<bool>;

const SUITES: [(&str, f64, Case); 7] = [
    ("quantile_sup_norm_lipschitz", 0.0, quantile_lipschitz),
    ("lower_quantile_is_minimal_qualifying_point", 0.0, lower_quantile_qualifies),
    ("componentwise_euclidean_lipschitz", 1e-12, componentwise_lipschitz),
    ("path_quantile_sup_norm_lipschitz", 0.0, path_lipschitz),
    ("collinear_geometric_quantile_is_q_alpha", 1e-12, collinear_equals_q_alpha),
    ("quantile_affine_equivariance", 1e-12, quantile_equivariance),
    ("geometric_quantile_similarity_equivariance", 1e-7, geometric_equivariance),
];

fn level(rng: &mut impl Rng) -> f64 {
    const GRID: [f64; 8] = [0.1, 0.2, 0.25, 0.3, 0.5, 0.6, 0.75, 0.9];
    if rng.random_bool(0.3) {
        GRID[rng.random_range(0..GRID.len())]
    } else {
        rng.random_range(0.001..0.999)
    }
}

/// Values with frequent ties.
fn values(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.3) {
                f64::from(rng.random_range(-5i32..5))
            } else {
                rng.random_range(-1e3..1e3)
            }
        })
        .collect()
}

fn sup_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn quantile_lipschitz(rng: &mut ChaCha8Rng) -> Result<bool> {
    let k = rng.random_range(1..40);
    let (x, y, a) = (values(rng, k), values(rng, k), level(rng));
    let d = sup_dist(&x, &y);
    Ok((univariate_quantile(&x, a)? - univariate_quantile(&y, a)?).abs() <= d
        && (univariate_quantile_lower(&x, a)? - univariate_quantile_lower(&y, a)?).abs() <= d)
}

fn lower_quantile_qualifies(rng: &mut ChaCha8Rng) -> Result<bool> {
    let k = rng.random_range(1..40);
    let (x, a) = (values(rng, k), level(rng));
    let q = univariate_quantile_lower(&x, a)?;
    let kf = k as f64;
    let qualifies = |c: f64| {
        let le = x.iter().filter(|&&v| v <= c).count() as f64;
        let ge = x.iter().filter(|&&v| v >= c).count() as f64;
        le >= kf * a - 1e-12 && ge >= kf * (1.0 - a) - 1e-12
    };
    Ok(x.contains(&q) && qualifies(q) && !x.iter().any(|&c| c < q && qualifies(c)))
}

fn componentwise_lipschitz(rng: &mut ChaCha8Rng) -> Result<bool> {
    let (k, d) = (rng.random_range(1..15), rng.random_range(1..5));
    let x: Vec<f64> = (0..k * d).map(|_| rng.random_range(-50.0..50.0)).collect();
    let z: Vec<f64> = (0..k * d).map(|_| rng.random_range(-50.0..50.0)).collect();
    let alpha = AlphaVector::new((0..d).map(|_| level(rng)).collect())?;
    let qx = componentwise_quantile(&PointSet::from_flat(x.clone(), d)?, &alpha)?;
    let qz = componentwise_quantile(&PointSet::from_flat(z.clone(), d)?, &alpha)?;
    let lhs = qx.iter().zip(&qz).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let rhs = x.iter().zip(&z).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    Ok(lhs <= rhs * (1.0 + 1e-12))
}

fn path_lipschitz(rng: &mut ChaCha8Rng) -> Result<bool> {
    let (k, m) = (rng.random_range(1..12), rng.random_range(1..8));
    let grid: Vec<f64> = (0..m).map(|j| j as f64 * 0.5).collect();
    let f: Vec<Vec<f64>> = (0..k).map(|_| values(rng, m)).collect();
    let g: Vec<Vec<f64>> = (0..k).map(|_| values(rng, m)).collect();
    let alpha = AlphaVector::uniform(level(rng))?;
    let qf = pointwise_path_quantile(&PathSet::new(grid.clone(), f.clone())?, &alpha)?;
    let qg = pointwise_path_quantile(&PathSet::new(grid, g.clone())?, &alpha)?;
    let rhs = f.iter().zip(&g).map(|(a, b)| sup_dist(a, b)).fold(0.0, f64::max);
    Ok(sup_dist(&qf, &qg) <= rhs)
}

fn collinear_equals_q_alpha(rng: &mut ChaCha8Rng) -> Result<bool> {
    let k = rng.random_range(1..20);
    let t = values(rng, k);
    let c = rng.random_range(-10.0..10.0);
    let rows: Vec<[f64; 2]> = t.iter().map(|&v| [v, c]).collect();
    let a = level(rng);
    let u = QuantileDirection::new(vec![2.0 * a - 1.0, 0.0])?;
    let q = geometric_quantile(&PointSet::from_rows(&rows)?, &u, SolverOptions::default())?;
    let want = univariate_quantile(&t, a)?;
    let scale = t.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok((q.point[0] - want).abs() <= 1e-12 * scale && q.point[1] == c)
}

fn quantile_equivariance(rng: &mut ChaCha8Rng) -> Result<bool> {
    let k = rng.random_range(1..40);
    let (x, a) = (values(rng, k), level(rng));
    let c = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..10.0) };
    let s = rng.random_range(-100.0..100.0);
    let q = univariate_quantile(&x, a)?;
    let moved: Vec<f64> = x.iter().map(|v| c * (v - s)).collect();
    let want = c * (q - s);
    Ok((univariate_quantile(&moved, a)? - want).abs() <= 1e-12 * (1.0 + want.abs() + c * s.abs()))
}

fn geometric_equivariance(rng: &mut ChaCha8Rng) -> Result<bool> {
    let k = rng.random_range(1..9);
    let rows: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let (un, th): (f64, f64) = (rng.random_range(0.0..0.8), rng.random_range(0.0..std::f64::consts::TAU));
    let u = [un * th.cos(), un * th.sin()];
    let (c, phi) = (10f64.powf(rng.random_range(-2.0..2.0)), rng.random_range(0.0..std::f64::consts::TAU));
    let s = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
    let map = |p: [f64; 2]| {
        let (x, y) = (p[0] - s[0], p[1] - s[1]);
        [c * (phi.cos() * x - phi.sin() * y), c * (phi.sin() * x + phi.cos() * y)]
    };
    let rot = |p: [f64; 2]| [phi.cos() * p[0] - phi.sin() * p[1], phi.sin() * p[0] + phi.cos() * p[1]];
    let opts = SolverOptions::default();
    let q = geometric_quantile(&PointSet::from_rows(&rows)?, &QuantileDirection::new(u.to_vec())?, opts)?.point;
    let moved: Vec<[f64; 2]> = rows.iter().map(|&p| map(p)).collect();
    let qm = geometric_quantile(&PointSet::from_rows(&moved)?, &QuantileDirection::new(rot(u).to_vec())?, opts)?.point;
    let want = map([q[0], q[1]]);
    let err = ((qm[0] - want[0]).powi(2) + (qm[1] - want[1]).powi(2)).sqrt();
    Ok(err <= 1e-7 * c * (1.0 + s[0].abs() + s[1].abs()))
}

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs every suite for `cases` instances.
pub fn run_property_suites(seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    SUITES
        .iter()
        .enumerate()
        .map(|(si, &(name, tolerance, case))| {
            let base = (si as u64) << 40;
            let failed = (0..cases as u64)
                .into_par_iter()
                .map(|i| case(&mut stream(seed, Purpose::Property, base | i)).map(|ok| usize::from(!ok)))
                .collect::<Result<Vec<usize>>>()?;
            Ok(PropertyOutcome {
                name: name.to_string(),
                cases,
                violations: failed.iter().sum(),
                tolerance,
            })
        })
        .collect()
}
