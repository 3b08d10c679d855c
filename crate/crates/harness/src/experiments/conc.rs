//! Exceedance frequency of the geometric median-of-means against the
//! binomial concentration bound.

use qoe_core::asymptotics::{c_nu, concentration_bound, ConcentrationParams};
use qoe_core::geometry::QuantileDirection;
use qoe_core::qoe::{
    contaminate, partition, qoe_estimate, Adversary, BaseEstimator, BlockRule, ContaminationCount,
    ContaminationSpec, Dataset, Placement, QoEConfig, QuantileSpec, SignPattern,
};
use qoe_core::quantile::univariate_quantile;
use rand::Rng;
use rand_distr::StudentT;

use super::replicate;
use crate::config::ConcentrationConfig;
use crate::error::{config_error, HarnessError, Result};
use crate::report::{Check, ExperimentReport, Tolerance};
use crate::rng::{derived_seed, stream, Purpose};

fn t_sample(rng: &mut impl Rng, dist: &StudentT<f64>, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(dist)).collect()
}

/// Norms of `count` clean block means.
fn pilot_norms(cfg: &ConcentrationConfig, dist: &StudentT<f64>, index: u64) -> Vec<f64> {
    let mut rng = stream(cfg.seed, Purpose::Pilot, index);
    (0..cfg.pilot_blocks)
        .map(|_| {
            let mut mean = vec![0.0; cfg.dim];
            for _ in 0..cfg.block_len {
                for m in mean.iter_mut() {
                    *m += rng.sample(dist) / cfg.block_len as f64;
                }
            }
            mean.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect()
}

pub fn run_concentration_check(cfg: &ConcentrationConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let dist = StudentT::new(cfg.dof).map_err(|e| HarnessError::Config(format!("dof: {e}")))?;
    let eps = univariate_quantile(&pilot_norms(cfg, &dist, 0), 1.0 - cfg.target_tail)?;
    let holdout = pilot_norms(cfg, &dist, 1);
    let p_hat = holdout.iter().filter(|&&v| v > eps).count() as f64 / holdout.len() as f64;
    if !(p_hat > 0.0 && p_hat < cfg.nu) {
        return config_error(format!("pilot tail p̂ = {p_hat} must lie in (0, ν = {})", cfg.nu));
    }
    let c = c_nu(cfg.nu, 0.0)?;
    let n = cfg.k * cfg.block_len;
    let part = partition(n, cfg.k)?;
    let qcfg = QoEConfig::new(BlockRule::Fixed(cfg.k), QuantileSpec::Geometric(QuantileDirection::zero(cfg.dim)));

    let mut variants = Vec::new();
    for &tau in &cfg.taus {
        let bad = (tau * cfg.k as f64).floor() as usize;
        let tau_eff = bad as f64 / cfg.k as f64;
        let tau_max = (cfg.nu - p_hat) / (1.0 - p_hat);
        if tau_eff > tau_max {
            return config_error(format!("τ = {tau_eff} exceeds (ν − p̂)/(1 − p̂) = {tau_max}"));
        }
        let spec = ContaminationSpec {
            count: ContaminationCount::Count(bad),
            placement: Placement::WorstCaseOnePerBlock,
            adversary: Adversary::Amplitude {
                magnitude: cfg.magnitude,
                signs: SignPattern::Positive,
            },
        };
        let bound = concentration_bound(&ConcentrationParams {
            nu: cfg.nu,
            p: p_hat,
            tau: tau_eff,
            k: cfg.k,
            u_norm: 0.0,
        })?;
        variants.push((tau, spec, bound));
    }

    let records = replicate(cfg.replications, |rep| {
        let mut rng = stream(cfg.seed, Purpose::Data, rep);
        let data = Dataset::from_flat(t_sample(&mut rng, &dist, n * cfg.dim), cfg.dim)?;
        let seed = derived_seed(cfg.seed, Purpose::Contamination, rep);
        variants
            .iter()
            .map(|(_, spec, _)| {
                let x = contaminate(&data, spec, &part, seed)?.data;
                let t = qoe_estimate(&x, &BaseEstimator::Mean, &qcfg)?.value;
                Ok(t.iter().map(|v| v * v).sum::<f64>().sqrt())
            })
            .collect::<Result<Vec<f64>>>()
    })?;

    let mut report = ExperimentReport::new("concentration_check", cfg.seed, cfg.replications, cfg)?;
    let r = cfg.replications as f64;
    for (i, (tau, _, bound)) in variants.iter().enumerate() {
        let hits = records.iter().filter(|row| row[i] > c * eps).count() as f64;
        let se = (bound * (1.0 - bound) / r).sqrt();
        report.check(Check::new(
            format!("tau={tau}/exceedance"),
            hits / r,
            bound + cfg.se_multiplier * se,
            Tolerance::AtMost,
        ));
        report.diag(format!("tau={tau}/bound"), *bound);
    }
    let single = concentration_bound(&ConcentrationParams {
        nu: cfg.nu,
        p: p_hat,
        tau: 0.0,
        k: 1,
        u_norm: 0.0,
    })?;
    report.check(Check::new("k=1/bound_at_least_p", single, p_hat, Tolerance::AtLeast));
    report.diag("epsilon", eps);
    report.diag("p_hat", p_hat);
    report.diag("c_nu", c);
    report.records = records;
    Ok(report)
}
