//! The QoE estimator: partition, estimate per block, take a quantile.

mod contamination;
mod dataset;
mod estimator;
mod partition;

pub use contamination::{
    contaminate, Adversary, ContaminationCount, ContaminationSpec, Contaminated, Placement,
    SignPattern,
};
pub use dataset::{Dataset, BINARY_MAGIC};
pub use estimator::{block_estimates, BaseEstimator, BlockEstimates};
pub use partition::{admissible_beta, block_count, partition, BlockCount, BlockPartition};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{geometric_quantile, QuantileDirection, SolveStatus, SolverOptions};
use crate::quantile::{componentwise_quantile, AlphaVector, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRule {
    Fixed(usize),
    /// `k = ⌊c·n^β⌋`, clamped to `[1, n]`.
    Power { c: f64, beta: f64 },
}

impl BlockRule {
    pub fn resolve(&self, n: usize) -> Result<BlockCount> {
        match *self {
            Self::Fixed(k) => {
                partition(n, k)?;
                Ok(BlockCount { k, clamped: false })
            }
            Self::Power { c, beta } => block_count(n, c, beta),
        }
    }
}

/// Which quantile is taken of the block estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileSpec {
    ComponentWise(AlphaVector),
    Geometric(QuantileDirection),
}

impl QuantileSpec {
    pub fn median() -> Self {
        Self::ComponentWise(AlphaVector::median())
    }
}

fn default_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoEConfig {
    pub blocks: BlockRule,
    pub quantile: QuantileSpec,
    /// Normalisation `a_n = n^rate_exponent` of the block estimator.
    #[serde(default = "default_half")]
    pub rate_exponent: f64,
    /// Convergence-rate exponent of the block estimator's law to its limit.
    #[serde(default = "default_half")]
    pub beta_star: f64,
    /// Seeded row shuffle applied before partitioning.
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl QoEConfig {
    pub fn new(blocks: BlockRule, quantile: QuantileSpec) -> Self {
        Self {
            blocks,
            quantile,
            rate_exponent: 0.5,
            beta_star: 0.5,
            shuffle_seed: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BlockRule::Power { c, beta } = self.blocks {
            if !(c > 0.0) || !(beta > 0.0 && beta < 1.0) {
                return invalid(format!("block rule needs c > 0 and β ∈ (0,1), got c = {c}, β = {beta}"));
            }
        }
        if !(self.beta_star > 0.0 && self.beta_star <= 1.0) {
            return invalid(format!("β* = {} must lie in (0, 1]", self.beta_star));
        }
        if !(self.rate_exponent > 0.0) {
            return invalid("rate exponent must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSummary {
    pub status: SolveStatus,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoeDiagnostics {
    pub k: usize,
    pub block_len: usize,
    pub discarded: usize,
    pub clamped: bool,
    pub degenerate_blocks: usize,
    pub geometric: Option<GeoSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoeEstimate {
    pub value: Vec<f64>,
    pub diagnostics: QoeDiagnostics,
}

/// Quantile of a set of block estimates.
pub fn quantile_of_estimates(
    estimates: &PointSet,
    spec: &QuantileSpec,
    solver: SolverOptions,
) -> Result<(Vec<f64>, Option<GeoSummary>)> {
    match spec {
        QuantileSpec::ComponentWise(alpha) => Ok((componentwise_quantile(estimates, alpha)?, None)),
        QuantileSpec::Geometric(u) => {
            let r = geometric_quantile(estimates, u, solver)?;
            let summary = GeoSummary {
                status: r.status,
                residual: r.residual,
                iterations: r.iterations,
            };
            Ok((r.point, Some(summary)))
        }
    }
}

/// `T = q(Z^(1), …, Z^(k))` for block estimates `Z^(i)`.
pub fn qoe_estimate(data: &Dataset, est: &BaseEstimator, cfg: &QoEConfig) -> Result<QoeEstimate> {
    cfg.validate()?;
    let count = cfg.blocks.resolve(data.n())?;
    let part = partition(data.n(), count.k)?;

    let shuffled;
    let data = match cfg.shuffle_seed {
        Some(seed) => {
            let mut order: Vec<usize> = (0..data.n()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            shuffled = data.permuted(&order)?;
            &shuffled
        }
        None => data,
    };

    let blocks = block_estimates(data, est, &part)?;
    let (value, geometric) = quantile_of_estimates(&blocks.values, &cfg.quantile, cfg.solver)?;
    Ok(QoeEstimate {
        value,
        diagnostics: QoeDiagnostics {
            k: part.k,
            block_len: part.block_len,
            discarded: part.discarded,
            clamped: count.clamped,
            degenerate_blocks: blocks.degenerate.iter().filter(|&&b| b).count(),
            geometric,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_returns_constant() {
        let data = Dataset::from_column(vec![3.5; 100]).unwrap();
        for spec in [
            QuantileSpec::median(),
            QuantileSpec::ComponentWise(AlphaVector::uniform(0.2).unwrap()),
            QuantileSpec::Geometric(QuantileDirection::new(vec![0.4]).unwrap()),
        ] {
            let cfg = QoEConfig::new(BlockRule::Fixed(7), spec);
            let t = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
            assert_eq!(t.value, vec![3.5]);
            assert_eq!(t.diagnostics.discarded, 2);
        }
    }

    #[test]
    fn median_lies_between_block_means() {
        let xs: Vec<f64> = (0..99).map(|i| ((i * 37) % 99) as f64 - 49.0).collect();
        let data = Dataset::from_column(xs).unwrap();
        let cfg = QoEConfig::new(BlockRule::Fixed(9), QuantileSpec::median());
        let t = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
        let part = partition(99, 9).unwrap();
        let means = block_estimates(&data, &BaseEstimator::Mean, &part).unwrap().values.coordinate(0);
        let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= t.value[0] && t.value[0] <= hi);
    }

    #[test]
    fn power_rule_and_geometric_diagnostics() {
        let xs: Vec<f64> = (0..400).flat_map(|i| [(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
        let data = Dataset::from_flat(xs, 2).unwrap();
        let cfg = QoEConfig::new(
            BlockRule::Power { c: 1.0, beta: 0.5 },
            QuantileSpec::Geometric(QuantileDirection::zero(2)),
        );
        let t = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
        assert_eq!(t.diagnostics.k, 20);
        assert!(t.diagnostics.geometric.is_some());
    }

    #[test]
    fn shuffle_is_seeded() {
        let xs: Vec<f64> = (0..60).map(|i| (i * i % 17) as f64).collect();
        let data = Dataset::from_column(xs).unwrap();
        let mut cfg = QoEConfig::new(BlockRule::Fixed(6), QuantileSpec::median());
        cfg.shuffle_seed = Some(5);
        let a = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
        let b = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
