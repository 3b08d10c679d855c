//! Sample quantile of a contaminated sample, without blocks.

use qoe_core::asymptotics::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
use qoe_core::qoe::{contaminate, partition, Adversary, ContaminationSpec, Dataset, SignPattern};
use qoe_core::quantile::univariate_quantile;

use super::{normals, replicate};
use crate::config::SampleQuantileConfig;
use crate::error::Result;
use crate::ks::{ks_statistic, ks_threshold};
use crate::report::{Check, ExperimentReport, KsRecord, Tolerance};
use crate::rng::{derived_seed, stream, Purpose};
use crate::stats::mean_and_covariance;

pub fn run_sample_quantile_robustness(cfg: &SampleQuantileConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let part = partition(cfg.n, 1)?;
    let mut variants: Vec<(&str, ContaminationSpec, bool)> = vec![("contaminated", cfg.contamination, true)];
    if cfg.variants {
        variants.push(("clean", ContaminationSpec::none(), false));
        if let Adversary::Amplitude { magnitude, .. } = cfg.contamination.adversary {
            let mut alt = cfg.contamination;
            alt.adversary = Adversary::Amplitude {
                magnitude,
                signs: SignPattern::Alternating,
            };
            variants.push(("alternating", alt, false));
        }
    }
    let root_n = (cfg.n as f64).sqrt();
    let levels: Vec<(f64, f64, f64)> = cfg
        .alphas
        .iter()
        .map(|&a| {
            let z = std_normal_quantile(a)?;
            Ok((a, z, (a * (1.0 - a)).sqrt() / std_normal_pdf(z)))
        })
        .collect::<Result<_>>()?;

    // one row per replication: variants × alphas standardized values
    let records = replicate(cfg.replications, |rep| {
        let data = Dataset::from_column(normals(&mut stream(cfg.seed, Purpose::Data, rep), cfg.n))?;
        let seed = derived_seed(cfg.seed, Purpose::Contamination, rep);
        let mut row = Vec::with_capacity(variants.len() * levels.len());
        for (_, spec, _) in &variants {
            let x = contaminate(&data, spec, &part, seed)?.data;
            for &(a, z, sd) in &levels {
                row.push(root_n * (univariate_quantile(x.as_flat(), a)? - z) / sd);
            }
        }
        Ok(row)
    })?;

    let mut report = ExperimentReport::new("sample_quantile_robustness", cfg.seed, cfg.replications, cfg)?;
    let threshold = ks_threshold(cfg.replications, cfg.ks_level)?;
    let (mean, cov) = mean_and_covariance(&records);
    for (vi, (name, _, gating)) in variants.iter().enumerate() {
        for (ai, &(a, _, _)) in levels.iter().enumerate() {
            let col = vi * levels.len() + ai;
            let xs: Vec<f64> = records.iter().map(|r| r[col]).collect();
            let stat = ks_statistic(&xs, std_normal_cdf)?;
            let label = format!("{name}/alpha={a}");
            report.ks.push(KsRecord {
                label: label.clone(),
                statistic: stat,
                samples: xs.len(),
                threshold,
            });
            let check = Check::new(format!("ks/{label}"), stat, threshold, Tolerance::AtMost);
            report.check(if *gating { check } else { check.diagnostic() });
            report.diag(format!("mean/{label}"), mean[col]);
            report.diag(format!("var/{label}"), cov[(col, col)]);
        }
    }
    report.diag("l", cfg.contamination.resolve_count(cfg.n)? as f64);
    report
        .notes
        .push("values are standardized by the limit standard deviation √(α(1−α))/φ(z_α)".into());
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_variant_matches_the_normal_limit() {
        let cfg = SampleQuantileConfig {
            replications: 400,
            n: 2000,
            ..SampleQuantileConfig::default()
        };
        let r = run_sample_quantile_robustness(&cfg).unwrap();
        assert_eq!(r.records[0].len(), 6);
        for a in [0.5, 0.75] {
            let c = r.find(&format!("ks/clean/alpha={a}")).unwrap();
            assert!(!c.gating);
            assert!(c.passed, "{c:?}");
        }
    }
}
