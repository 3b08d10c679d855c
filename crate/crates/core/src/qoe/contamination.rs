//! Adversarial replacement of observations.
//!
//! A [`ContaminationSpec`] says how many rows are replaced, where they sit
//! relative to the block layout, and what the adversary writes into them.
//! The adversary sees the clean data and the partition.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::partition::{snapped_floor, BlockPartition};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationCount {
    /// Exactly `l` rows.
    Count(usize),
    /// `l = ⌊n^γ⌋` rows.
    Rate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Each replaced row lands in a different block.
    WorstCaseOnePerBlock,
    UniformRandom,
    /// The first `l` rows.
    Prefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    #[default]
    Positive,
    /// `+, −, +, …` over the replaced rows in index order.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adversary {
    /// Every entry of a replaced row is `value`.
    FixedValue { value: f64 },
    /// Every entry of a replaced row is `±magnitude`.
    Amplitude {
        magnitude: f64,
        #[serde(default)]
        signs: SignPattern,
    },
    /// A replaced row becomes `scale` times the clean mean of its block (the
    /// clean mean of all rows for rows outside every block).
    Dependent { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub count: ContaminationCount,
    pub placement: Placement,
    pub adversary: Adversary,
}

impl ContaminationSpec {
    pub fn none() -> Self {
        Self {
            count: ContaminationCount::Count(0),
            placement: Placement::UniformRandom,
            adversary: Adversary::FixedValue { value: 0.0 },
        }
    }

    /// Number of replaced rows for a sample of size `n`.
    pub fn resolve_count(&self, n: usize) -> Result<usize> {
        match self.count {
            ContaminationCount::Count(l) => Ok(l),
            ContaminationCount::Rate(g) => {
                if !(0.0..1.0).contains(&g) {
                    return invalid(format!("contamination exponent γ = {g} must lie in [0, 1)"));
                }
                Ok(snapped_floor((n as f64).powf(g)) as usize)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contaminated {
    pub data: Dataset,
    /// Replaced row indices, increasing.
    pub indices: Vec<usize>,
}

pub fn contaminate(
    data: &Dataset,
    spec: &ContaminationSpec,
    partition: &BlockPartition,
    seed: u64,
) -> Result<Contaminated> {
    let n = data.n();
    if partition.n != n {
        return invalid("partition does not match the dataset size");
    }
    let count = spec.resolve_count(n)?;
    if count > n {
        return invalid(format!("cannot contaminate {count} of {n} rows"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut indices: Vec<usize> = match spec.placement {
        Placement::Prefix => (0..count).collect(),
        Placement::UniformRandom => sample(&mut rng, n, count).into_vec(),
        Placement::WorstCaseOnePerBlock => {
            if count > partition.k {
                return invalid(format!(
                    "one-per-block placement needs count ≤ k, got {count} > {}",
                    partition.k
                ));
            }
            sample(&mut rng, partition.k, count)
                .into_iter()
                .map(|b| b * partition.block_len + rng.random_range(0..partition.block_len))
                .collect()
        }
    };
    indices.sort_unstable();

    let mut out = data.clone();
    match spec.adversary {
        Adversary::FixedValue { value } => {
            check_value(value)?;
            for &i in &indices {
                out.row_mut(i).fill(value);
            }
        }
        Adversary::Amplitude { magnitude, signs } => {
            check_value(magnitude)?;
            for (r, &i) in indices.iter().enumerate() {
                let s = match signs {
                    SignPattern::Positive => 1.0,
                    SignPattern::Alternating if r % 2 == 1 => -1.0,
                    SignPattern::Alternating => 1.0,
                };
                out.row_mut(i).fill(s * magnitude);
            }
        }
        Adversary::Dependent { scale } => {
            check_value(scale)?;
            let global = column_means(data, 0..n);
            for &i in &indices {
                let mean = match partition.block_of(i) {
                    Some(b) => column_means(data, partition.block(b)),
                    None => global.clone(),
                };
                for (dst, m) in out.row_mut(i).iter_mut().zip(mean) {
                    *dst = scale * m;
                }
            }
        }
    }
    Ok(Contaminated { data: out, indices })
}

fn check_value(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid("adversary values must be finite")
    }
}

fn column_means(data: &Dataset, rows: std::ops::Range<usize>) -> Vec<f64> {
    let len = rows.len() as f64;
    let mut m = vec![0.0; data.d()];
    for i in rows {
        for (acc, v) in m.iter_mut().zip(data.row(i)) {
            *acc += v;
        }
    }
    m.iter_mut().for_each(|v| *v /= len);
    m
}
