//! Normal limit of the component-wise QoE.

use nalgebra::DMatrix;
use qoe_core::asymptotics::{ols_gamma, sigma_alpha, std_normal_cdf, LimitLaw};
use qoe_core::qoe::{
    admissible_beta, contaminate, partition, qoe_estimate, BaseEstimator, BlockRule, ContaminationCount, Dataset,
    QoEConfig, QuantileSpec,
};
use rand::Rng;

use super::{normals, replicate};
use crate::config::{CltConfig, DataModel};
use crate::error::{config_error, Result};
use crate::ks::{ks_statistic, ks_threshold};
use crate::report::{Check, ExperimentReport, KsRecord, Moments, Tolerance};
use crate::rng::{derived_seed, stream, Purpose};
use crate::stats::mean_and_covariance;

/// `β` with `k = n^β`.
pub fn block_exponent(n: usize, k: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    (k as f64).ln() / (n as f64).ln()
}

struct Model {
    est: BaseEstimator,
    theta: Vec<f64>,
    target: DMatrix<f64>,
    /// Component-wise median target, reported next to the OLS target.
    alt_target: Option<DMatrix<f64>>,
}

fn model(cfg: &CltConfig) -> Result<Model> {
    Ok(match &cfg.model {
        DataModel::Normal { dim, sigma } => {
            let law = LimitLaw::gaussian(&(DMatrix::identity(*dim, *dim) * (sigma * sigma)))?;
            Model {
                est: BaseEstimator::Mean,
                theta: vec![0.0; *dim],
                target: sigma_alpha(&law, &cfg.alpha)?,
                alt_target: None,
            }
        }
        DataModel::Regression { beta, sigma } => {
            let p = beta.len();
            let exx = DMatrix::identity(p, p);
            let law = LimitLaw::gaussian(&(&exx * (sigma * sigma)))?;
            Model {
                est: BaseEstimator::Ols {
                    response: 0,
                    regressors: (1..=p).collect(),
                },
                theta: beta.clone(),
                target: ols_gamma(&exx, sigma * sigma)?,
                alt_target: Some(sigma_alpha(&law, &cfg.alpha)?),
            }
        }
    })
}

fn draw(cfg: &CltConfig, rng: &mut impl Rng) -> Result<Dataset> {
    let n = cfg.n;
    Ok(match &cfg.model {
        DataModel::Normal { dim, sigma } => {
            let xs = normals(rng, n * dim).into_iter().map(|v| sigma * v).collect();
            Dataset::from_flat(xs, *dim)?
        }
        DataModel::Regression { beta, sigma } => {
            let p = beta.len();
            let mut flat = Vec::with_capacity(n * (p + 1));
            for _ in 0..n {
                let x = normals(rng, p);
                let eps: f64 = normals(rng, 1)[0];
                flat.push(x.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + sigma * eps);
                flat.extend(x);
            }
            Dataset::from_flat(flat, p + 1)?
        }
    })
}

/// Checks `2γ < β ≤ β*` and returns `(β, γ)`.
fn admissibility(cfg: &CltConfig, k: usize) -> Result<(f64, f64)> {
    let beta = match cfg.blocks {
        BlockRule::Power { beta, .. } => beta,
        BlockRule::Fixed(_) => block_exponent(cfg.n, k),
    };
    let gamma = match cfg.contamination.count {
        ContaminationCount::Rate(g) => g,
        ContaminationCount::Count(0) => 0.0,
        ContaminationCount::Count(_) => cfg.gamma.unwrap_or(0.0),
    };
    let Some((lo, hi)) = admissible_beta(gamma, cfg.beta_star)? else {
        return config_error(format!(
            "no admissible block exponent: 2γ = {} is not below β* = {}",
            2.0 * gamma,
            cfg.beta_star
        ));
    };
    if !(beta > lo && beta <= hi + 1e-9) {
        return config_error(format!(
            "block exponent β = {beta:.6} lies outside the admissible interval (2γ, β*] = ({lo}, {hi}]"
        ));
    }
    Ok((beta, gamma))
}

pub fn run_clt(cfg: &CltConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let k = cfg.blocks.resolve(cfg.n)?.k;
    let (beta, gamma) = admissibility(cfg, k)?;
    let m = model(cfg)?;
    let part = partition(cfg.n, k)?;
    let mut qcfg = QoEConfig::new(cfg.blocks, QuantileSpec::ComponentWise(cfg.alpha.clone()));
    qcfg.beta_star = cfg.beta_star;
    let root_n = (cfg.n as f64).sqrt();
    let contaminated = cfg.contamination.resolve_count(cfg.n)? > 0;

    let outcomes = replicate(cfg.replications, |rep| {
        let clean = draw(cfg, &mut stream(cfg.seed, Purpose::Data, rep))?;
        let data = if contaminated {
            let seed = derived_seed(cfg.seed, Purpose::Contamination, rep);
            contaminate(&clean, &cfg.contamination, &part, seed)?.data
        } else {
            clean
        };
        let t = qoe_estimate(&data, &m.est, &qcfg)?;
        let z: Vec<f64> = t.value.iter().zip(&m.theta).map(|(v, th)| root_n * (v - th)).collect();
        let raw_err = match cfg.raw_error_min {
            Some(_) => {
                let (raw, _) = m.est.estimate(data.as_flat(), data.d())?;
                raw.iter().zip(&m.theta).map(|(v, th)| (v - th).abs()).fold(0.0, f64::max)
            }
            None => 0.0,
        };
        Ok((z, raw_err))
    })?;
    let (records, raw_errs): (Vec<Vec<f64>>, Vec<f64>) = outcomes.into_iter().unzip();

    let mut report = ExperimentReport::new("clt", cfg.seed, cfg.replications, cfg)?;
    let (mean, cov) = mean_and_covariance(&records);
    let d = mean.len();
    for i in 0..d {
        report.check(Check::new(format!("var[{i}]"), cov[(i, i)], m.target[(i, i)], Tolerance::Relative(cfg.rel_tol)));
        for j in i + 1..d {
            report.check(Check::new(
                format!("cov[{i},{j}]"),
                cov[(i, j)],
                m.target[(i, j)],
                Tolerance::Absolute(cfg.offdiag_abs_tol),
            ));
        }
    }
    if let Some(alt) = &m.alt_target {
        for i in 0..d {
            report.check(
                Check::new(format!("var_median_law[{i}]"), cov[(i, i)], alt[(i, i)], Tolerance::Relative(cfg.rel_tol))
                    .diagnostic(),
            );
        }
        report
            .notes
            .push("var_median_law compares against Σ_α of the Gaussian limit of √m(β̂ − β)".into());
    }
    let threshold = ks_threshold(cfg.replications, cfg.ks_level)?;
    for i in 0..d {
        let sd = m.target[(i, i)].sqrt();
        let col: Vec<f64> = records.iter().map(|r| r[i] / sd).collect();
        let stat = ks_statistic(&col, std_normal_cdf)?;
        report.ks.push(KsRecord {
            label: format!("coord[{i}]"),
            statistic: stat,
            samples: col.len(),
            threshold,
        });
        report.check(Check::new(format!("ks[{i}]"), stat, threshold, Tolerance::AtMost));
    }
    if let Some(min) = cfg.raw_error_min {
        let worst = raw_errs.iter().cloned().fold(f64::INFINITY, f64::min);
        report.check(Check::new("raw_min_abs_error", worst, min, Tolerance::AtLeast));
    }
    report.diag("k", k as f64);
    report.diag("beta", beta);
    report.diag("gamma", gamma);
    report.diag("discarded", part.discarded as f64);
    let labels = (0..d).map(|i| format!("theta[{i}]")).collect();
    report.moments = Some(Moments::new(labels, mean, &cov, &m.target));
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qoe_core::qoe::{ContaminationSpec, Placement};

    #[test]
    fn small_run_is_deterministic_and_consistent() {
        let cfg = CltConfig {
            replications: 50,
            n: 400,
            blocks: BlockRule::Fixed(20),
            ..CltConfig::default()
        };
        let a = run_clt(&cfg).unwrap();
        assert_eq!(a, run_clt(&cfg).unwrap());
        assert!(a.flags_consistent());
        assert_eq!(a.records.len(), 50);
    }

    #[test]
    fn inadmissible_contamination_is_a_config_error() {
        let cfg = CltConfig {
            replications: 2,
            contamination: ContaminationSpec {
                count: ContaminationCount::Rate(0.3),
                placement: Placement::UniformRandom,
                ..ContaminationSpec::none()
            },
            ..CltConfig::default()
        };
        let err = run_clt(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("admissible"), "{err}");
    }

    #[test]
    fn block_exponent_of_square_root_rule() {
        assert!((block_exponent(10_000, 100) - 0.5).abs() < 1e-15);
    }
}
