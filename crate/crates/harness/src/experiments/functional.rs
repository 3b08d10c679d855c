//! Point-wise median of Brownian paths on a time grid.

use nalgebra::DMatrix;
use qoe_core::asymptotics::brownian_qoe_cov;
use qoe_core::quantile::pointwise_path_quantile;
use qoe_core::{AlphaVector, PathSet};
use rand::Rng;
use rand_distr::StandardNormal;

use super::replicate;
use crate::config::FunctionalConfig;
use crate::error::Result;
use crate::report::{Check, ExperimentReport, Moments, Tolerance};
use crate::rng::{stream, Purpose};
use crate::stats::mean_and_covariance;

/// A Brownian path at the grid times, from independent Gaussian increments.
pub(crate) fn brownian_path(rng: &mut impl Rng, grid: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    let mut w = 0.0;
    grid.iter()
        .map(|&t| {
            let z: f64 = rng.sample(StandardNormal);
            w += (t - prev).sqrt() * z;
            prev = t;
            w
        })
        .collect()
}

pub fn run_functional(cfg: &FunctionalConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let root_k = (cfg.k as f64).sqrt();
    let records = replicate(cfg.replications, |rep| {
        let mut rng = stream(cfg.seed, Purpose::Data, rep);
        let paths: Vec<Vec<f64>> = (0..cfg.k).map(|_| brownian_path(&mut rng, &cfg.grid)).collect();
        let m = pointwise_path_quantile(&PathSet::new(cfg.grid.clone(), paths)?, &AlphaVector::median())?;
        Ok(m.into_iter().map(|v| root_k * v).collect::<Vec<f64>>())
    })?;

    let g = cfg.grid.len();
    let mut target = DMatrix::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            target[(i, j)] = brownian_qoe_cov(cfg.grid[i], cfg.grid[j])?;
        }
    }
    let (mean, cov) = mean_and_covariance(&records);
    let mut report = ExperimentReport::new("functional", cfg.seed, cfg.replications, cfg)?;
    for i in 0..g {
        for j in i..g {
            let (ti, tj) = (cfg.grid[i], cfg.grid[j]);
            let tol = if target[(i, j)].abs() < cfg.small_target {
                Tolerance::Absolute(cfg.small_abs_tol)
            } else {
                Tolerance::Relative(cfg.rel_tol)
            };
            report.check(Check::new(format!("cov({ti},{tj})"), cov[(i, j)], target[(i, j)], tol));
        }
    }
    let labels = cfg.grid.iter().map(|t| format!("t={t}")).collect();
    report.moments = Some(Moments::new(labels, mean, &cov, &target));
    report.records = records;
    Ok(report)
}
