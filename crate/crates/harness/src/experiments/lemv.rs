//! Re-parametrised direction after replacing a few points.

use qoe_core::geometry::{adjusted_parameter, geometric_quantile, QuantileDirection, SolverOptions};
use qoe_core::PointSet;
use rand::Rng;
use rand_distr::StandardNormal;

use super::replicate;
use crate::config::LemmaVConfig;
use crate::error::Result;
use crate::report::{Check, ExperimentReport, Tolerance};
use crate::rng::{stream, Purpose};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `[k, p, ‖v − u‖, 2p/k, re-solve distance, v == u]`
fn case(points: &PointSet, replaced: &[Vec<f64>], u: &QuantileDirection) -> Result<Vec<f64>> {
    let opts = SolverOptions::default();
    let x_star = geometric_quantile(points, u, opts)?.point;
    let mut modified = points.clone();
    for (i, r) in replaced.iter().enumerate() {
        // an empty row stands for a copy of x*
        modified.set_point(i, if r.is_empty() { &x_star } else { r })?;
    }
    let v = adjusted_parameter(points, &modified, &x_star, u)?;
    let again = geometric_quantile(&modified, &v, opts)?.point;
    let (k, p) = (points.len() as f64, replaced.len() as f64);
    Ok(vec![
        k,
        p,
        dist(v.as_slice(), u.as_slice()),
        2.0 * p / k,
        dist(&again, &x_star),
        f64::from(u8::from(v == *u)),
    ])
}

fn random_case(cfg: &LemmaVConfig, index: u64) -> Result<Vec<f64>> {
    let mut rng = stream(cfg.seed, Purpose::Instance, index);
    let k = rng.random_range(cfg.k_min..=cfg.k_max);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..2).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let unorm = rng.random_range(0.0..cfg.u_max);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let u = QuantileDirection::new(vec![unorm * theta.cos(), unorm * theta.sin()])?;
    let limit = k as f64 * (1.0 - unorm) / 2.0;
    let p_max = (limit.ceil() as usize).saturating_sub(1);
    let p = if index.is_multiple_of(10) || p_max == 0 {
        0
    } else {
        rng.random_range(1..=p_max)
    };
    let replaced: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            if rng.random_bool(0.2) {
                Vec::new()
            } else {
                let far = 10f64.powf(rng.random_range(0.0..3.0));
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                vec![far * a.cos(), far * a.sin()]
            }
        })
        .collect();
    case(&PointSet::from_rows(&rows)?, &replaced, &u)
}

pub fn run_lemma_v_check(cfg: &LemmaVConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let records = replicate(cfg.instances, |i| random_case(cfg, i))?;

    let mut report = ExperimentReport::new("lemma_v_check", cfg.seed, cfg.instances, cfg)?;
    let bound_fail = records.iter().filter(|r| r[2] > r[3]).count();
    let max_resolve = records.iter().map(|r| r[4]).fold(0.0, f64::max);
    let p0: Vec<&Vec<f64>> = records.iter().filter(|r| r[1] == 0.0).collect();
    let p0_fail = p0.iter().filter(|r| r[5] != 1.0).count();
    report.check(Check::new("bound_violations", bound_fail as f64, 0.0, Tolerance::AtMost));
    report.check(Check::new("max_resolve_distance", max_resolve, cfg.resolve_tol, Tolerance::AtMost));
    report.check(Check::new("p0_not_identical", p0_fail as f64, 0.0, Tolerance::AtMost));

    // k = 9, p = 4, u = 0: 4 < 4.5 is the largest legal p
    let pts: Vec<Vec<f64>> = (0..9)
        .map(|i| {
            let a = i as f64 * 0.7;
            vec![a.cos() * (1.0 + 0.1 * i as f64), a.sin()]
        })
        .collect();
    let replaced = vec![vec![50.0, 0.0], vec![0.0, -80.0], vec![-30.0, 30.0], vec![200.0, 5.0]];
    let edge = case(&PointSet::from_rows(&pts)?, &replaced, &QuantileDirection::zero(2))?;
    report.check(Check::new("k9p4/norm_gap", edge[2], edge[3], Tolerance::AtMost));
    report.check(Check::new("k9p4/resolve_distance", edge[4], cfg.resolve_tol, Tolerance::AtMost));

    report.diag("p0_instances", p0.len() as f64);
    report.diag(
        "max_bound_ratio",
        records.iter().filter(|r| r[3] > 0.0).map(|r| r[2] / r[3]).fold(0.0, f64::max),
    );
    report.records = records;
    Ok(report)
}
