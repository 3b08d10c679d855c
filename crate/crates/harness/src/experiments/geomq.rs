//! Geometric-quantile solver against a brute-force grid in the plane.

use qoe_core::geometry::{
    first_order_residual, geometric_quantile, objective, QuantileDirection, SolveStatus, SolverOptions,
};
use qoe_core::PointSet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::replicate;
use crate::config::GeomOracleConfig;
use crate::error::Result;
use crate::report::{Check, ExperimentReport, Tolerance};
use crate::rng::{stream, Purpose};

/// Minimum of the objective over nested grids in the plane. The first grid
/// covers a disc that must contain every minimiser; each further level
/// zooms to a few cells around the best point so far.
pub fn grid_minimum(points: &PointSet, u: &[f64], grid: usize, levels: usize) -> (Vec<f64>, f64) {
    let k = points.len() as f64;
    let mut c = [0.0; 2];
    for p in points.iter() {
        c[0] += p[0] / k;
        c[1] += p[1] / k;
    }
    let radius = points
        .iter()
        .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let unorm = (u[0] * u[0] + u[1] * u[1]).sqrt();
    // F(y) − F(c) ≥ k‖y − c‖(1 − ‖u‖) − 2kD bounds every minimiser
    let mut half = radius * (1.0 + 2.0 / (1.0 - unorm));
    let mut best = (c.to_vec(), objective(points, &c, u));
    if half == 0.0 {
        return best;
    }
    let mut centre = c;
    for _ in 0..levels {
        let step = 2.0 * half / (grid - 1) as f64;
        for i in 0..grid {
            for j in 0..grid {
                let y = [centre[0] - half + i as f64 * step, centre[1] - half + j as f64 * step];
                let f = objective(points, &y, u);
                if f < best.1 {
                    best = (y.to_vec(), f);
                }
            }
        }
        centre = [best.0[0], best.0[1]];
        half = 4.0 * step;
    }
    best
}

struct Instance {
    points: PointSet,
    u: QuantileDirection,
}

fn instance(rng: &mut ChaCha8Rng, cfg: &GeomOracleConfig) -> Result<Instance> {
    let k = rng.random_range(1..=cfg.k_max);
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let shift = [rng.random_range(-5.0..5.0) * scale, rng.random_range(-5.0..5.0) * scale];
    let kind = rng.random_range(0..10);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let h = [angle.cos(), angle.sin()];
    let mut rows: Vec<[f64; 2]> = (0..k)
        .map(|_| {
            if kind == 0 {
                let t = rng.random_range(-1.0..1.0) * scale;
                [shift[0] + t * h[0], shift[1] + t * h[1]]
            } else {
                [
                    shift[0] + rng.random_range(-1.0..1.0) * scale,
                    shift[1] + rng.random_range(-1.0..1.0) * scale,
                ]
            }
        })
        .collect();
    if kind == 1 && k >= 3 {
        rows[k - 1] = rows[0];
    }
    let unorm = rng.random_range(0.0..cfg.u_max);
    let theta: f64 = if kind == 0 && rng.random_bool(0.5) {
        angle
    } else {
        rng.random_range(0.0..std::f64::consts::TAU)
    };
    Ok(Instance {
        points: PointSet::from_rows(&rows)?,
        u: QuantileDirection::new(vec![unorm * theta.cos(), unorm * theta.sin()])?,
    })
}

/// `[k, relative gap, residual (−1 off the interior), status code, solver failure]`
fn evaluate(cfg: &GeomOracleConfig, inst: &Instance) -> Result<Vec<f64>> {
    let k = inst.points.len() as f64;
    let u = inst.u.as_slice();
    let (_, f_grid) = grid_minimum(&inst.points, u, cfg.grid, cfg.zoom_levels);
    let scale = {
        let c = [
            inst.points.iter().map(|p| p[0]).sum::<f64>() / k,
            inst.points.iter().map(|p| p[1]).sum::<f64>() / k,
        ];
        inst.points
            .iter()
            .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    };
    let r = match geometric_quantile(&inst.points, &inst.u, SolverOptions::default()) {
        Ok(r) => r,
        Err(_) => return Ok(vec![k, f64::MAX, -1.0, -1.0, 1.0]),
    };
    let gap = (objective(&inst.points, &r.point, u) - f_grid) / scale;
    let (residual, code) = match r.status {
        SolveStatus::Interior => (first_order_residual(&inst.points, &r.point, &inst.u)?, 0.0),
        SolveStatus::Anchored(_) => (-1.0, 1.0),
        SolveStatus::CollinearFallback { .. } => (-1.0, 2.0),
    };
    Ok(vec![k, gap, residual, code, 0.0])
}

pub fn run_geom_oracle(cfg: &GeomOracleConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let records = replicate(cfg.instances, |i| {
        let inst = instance(&mut stream(cfg.seed, Purpose::Instance, i), cfg)?;
        evaluate(cfg, &inst)
    })?;

    let mut report = ExperimentReport::new("geom_oracle", cfg.seed, cfg.instances, cfg)?;
    let failures = records.iter().filter(|r| r[4] != 0.0).count();
    let max_gap = records.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max);
    let max_residual = records.iter().map(|r| r[2]).fold(0.0, f64::max);
    report.check(Check::new("solver_failures", failures as f64, 0.0, Tolerance::AtMost));
    report.check(Check::new("max_relative_gap", max_gap, cfg.gap_tol, Tolerance::AtMost));
    report.check(Check::new("max_interior_residual", max_residual, cfg.residual_tol, Tolerance::AtMost));

    let sym = PointSet::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])?;
    let q = geometric_quantile(&sym, &QuantileDirection::zero(2), SolverOptions::default())?;
    let off = q.point[0].abs().max(q.point[1].abs());
    report.check(Check::new("symmetric_centre_offset", off, 0.0, Tolerance::AtMost));

    let line = PointSet::from_rows(&[[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [10.0, 20.0]])?;
    let q = geometric_quantile(&line, &QuantileDirection::zero(2), SolverOptions::default())?;
    let off = (q.point[0] - 2.0).abs().max((q.point[1] - 4.0).abs());
    report.check(Check::new("collinear_middle_offset", off, 0.0, Tolerance::AtMost));

    for (code, name) in [(0.0, "interior"), (1.0, "anchored"), (2.0, "collinear")] {
        report.diag(name, records.iter().filter(|r| r[3] == code).count() as f64);
    }
    report
        .notes
        .push("gaps are relative to the largest distance from the centroid; records are [k, gap, residual, status, failed]".into());
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_finds_symmetric_centre() {
        let p = PointSet::from_rows(&[[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]]).unwrap();
        let (y, f) = grid_minimum(&p, &[0.0, 0.0], 41, 6);
        assert!(y[0].abs() < 1e-9 && y[1].abs() < 1e-9);
        assert!((f - 4.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn grid_covers_quantiles_outside_the_hull() {
        // two points and a strong direction push the minimiser to an endpoint
        let p = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let (y, _) = grid_minimum(&p, &[0.6, 0.0], 51, 16);
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn small_oracle_run_passes() {
        let cfg = GeomOracleConfig {
            instances: 20,
            grid: 41,
            zoom_levels: 8,
            ..GeomOracleConfig::default()
        };
        let r = run_geom_oracle(&cfg).unwrap();
        assert!(r.passed(), "{}", r.summary());
    }
}
