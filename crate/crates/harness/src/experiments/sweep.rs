//! QoE against the raw mean over a grid of contamination exponents.

use qoe_core::qoe::{
    contaminate, partition, qoe_estimate, Adversary, BaseEstimator, ContaminationCount, ContaminationSpec, Dataset,
    Placement, QoEConfig, QuantileSpec,
};

use super::{block_exponent, normals, replicate};
use crate::config::SweepConfig;
use crate::error::Result;
use crate::report::{Check, ExperimentReport, Table, Tolerance};
use crate::rng::{derived_seed, stream, Purpose};
use crate::stats::median;

const COLUMNS: [&str; 7] = [
    "gamma",
    "l",
    "admissible",
    "expected_failure",
    "median_error",
    "max_error",
    "min_error",
];

struct Cell {
    qoe: f64,
    raw: f64,
    /// QoE of the contaminated sample differs from the clean QoE.
    differs: bool,
}

pub fn run_contamination_sweep(cfg: &SweepConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let k = cfg.blocks.resolve(cfg.n)?.k;
    let beta = match cfg.blocks {
        qoe_core::qoe::BlockRule::Power { beta, .. } => beta,
        qoe_core::qoe::BlockRule::Fixed(_) => block_exponent(cfg.n, k),
    };
    let part = partition(cfg.n, k)?;
    let mut qcfg = QoEConfig::new(cfg.blocks, QuantileSpec::median());
    qcfg.beta_star = cfg.beta_star;
    let adversary = Adversary::Amplitude {
        magnitude: cfg.magnitude,
        signs: cfg.signs,
    };

    // row 0 is the uncontaminated baseline
    let mut rows: Vec<(Option<f64>, usize)> = vec![(None, 0)];
    for &g in &cfg.gammas {
        let l = ContaminationSpec {
            count: ContaminationCount::Rate(g),
            ..ContaminationSpec::none()
        }
        .resolve_count(cfg.n)?;
        rows.push((Some(g), l));
    }
    let specs: Vec<ContaminationSpec> = rows
        .iter()
        .map(|&(_, l)| ContaminationSpec {
            count: ContaminationCount::Count(l),
            placement: if l <= k {
                Placement::WorstCaseOnePerBlock
            } else {
                Placement::UniformRandom
            },
            adversary,
        })
        .collect();

    let per_rep = replicate(cfg.replications, |rep| {
        let data = Dataset::from_column(normals(&mut stream(cfg.seed, Purpose::Data, rep), cfg.n))?;
        let clean = qoe_estimate(&data, &BaseEstimator::Mean, &qcfg)?.value[0];
        specs
            .iter()
            .enumerate()
            .map(|(row, spec)| {
                let seed = derived_seed(cfg.seed, Purpose::Contamination, rep * 1024 + row as u64);
                let dirty = contaminate(&data, spec, &part, seed)?.data;
                let t = qoe_estimate(&dirty, &BaseEstimator::Mean, &qcfg)?.value[0];
                let raw = BaseEstimator::Mean.estimate(dirty.as_flat(), 1)?.0[0];
                Ok(Cell {
                    qoe: t.abs(),
                    raw: raw.abs(),
                    differs: t.to_bits() != clean.to_bits(),
                })
            })
            .collect::<Result<Vec<Cell>>>()
    })?;

    let mut report = ExperimentReport::new("contamination_sweep", cfg.seed, cfg.replications, cfg)?;
    let mut table = Table::new(&COLUMNS);
    let qoe_bound = cfg.qoe_error_scale / (cfg.n as f64).sqrt();
    for (row, &(gamma, l)) in rows.iter().enumerate() {
        let admissible = gamma.is_none_or(|g| 2.0 * g < beta && beta <= cfg.beta_star + 1e-9);
        let expected_failure = 2 * l > k;
        let qoe: Vec<f64> = per_rep.iter().map(|c| c[row].qoe).collect();
        let raw: Vec<f64> = per_rep.iter().map(|c| c[row].raw).collect();
        let g = gamma.unwrap_or(-1.0);
        for (label, errs) in [("qoe", &qoe), ("raw_mean", &raw)] {
            let max = errs.iter().cloned().fold(0.0, f64::max);
            let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
            table.push(
                label,
                vec![
                    g,
                    l as f64,
                    f64::from(u8::from(admissible)),
                    f64::from(u8::from(expected_failure)),
                    median(errs),
                    max,
                    min,
                ],
            );
        }
        let tag = gamma.map_or("clean".to_string(), |g| format!("gamma={g}"));
        if gamma.is_none() {
            let differs = per_rep.iter().filter(|c| c[row].differs).count();
            report.check(Check::new(format!("{tag}/identical_to_clean"), differs as f64, 0.0, Tolerance::AtMost));
            continue;
        }
        if admissible && !expected_failure {
            let max = qoe.iter().cloned().fold(0.0, f64::max);
            report.check(Check::new(format!("{tag}/qoe_max_error"), max, qoe_bound, Tolerance::AtMost));
        }
        if l > 0 {
            let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
            report.check(Check::new(format!("{tag}/raw_min_error"), min, cfg.raw_error_min, Tolerance::AtLeast));
        }
    }
    report.diag("k", k as f64);
    report.diag("beta", beta);
    report.notes.push(
        "gamma = -1 marks the uncontaminated baseline; rows with expected_failure = 1 have a majority of contaminated blocks"
            .into(),
    );
    report.table = Some(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_has_two_rows_per_cell() {
        let cfg = SweepConfig {
            replications: 5,
            n: 2500,
            blocks: qoe_core::qoe::BlockRule::Fixed(50),
            gammas: vec![0.0, 0.2, 0.6],
            ..SweepConfig::default()
        };
        let r = run_contamination_sweep(&cfg).unwrap();
        let t = r.table.as_ref().unwrap();
        assert_eq!(t.rows.len(), 2 * 4);
        assert_eq!(r.find("clean/identical_to_clean").unwrap().observed, 0.0);
        // γ = 0.6 puts 108 points into 50 blocks: expected failure, no QoE check
        assert!(r.find("gamma=0.6/qoe_max_error").is_none());
        assert!(r.find("gamma=0.6/raw_min_error").unwrap().passed);
    }
}
