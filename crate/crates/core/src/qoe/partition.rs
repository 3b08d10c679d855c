use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `k` contiguous blocks of `⌊n/k⌋` indices each; the trailing
/// `n − k⌊n/k⌋` indices are not used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub n: usize,
    pub k: usize,
    pub block_len: usize,
    pub discarded: usize,
}

impl BlockPartition {
    pub fn block(&self, i: usize) -> Range<usize> {
        i * self.block_len..(i + 1) * self.block_len
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        (0..self.k).map(move |i| self.block(i))
    }

    /// Block containing index `idx`, or `None` for a discarded index.
    pub fn block_of(&self, idx: usize) -> Option<usize> {
        let b = idx / self.block_len;
        (b < self.k).then_some(b)
    }
}

pub fn partition(n: usize, k: usize) -> Result<BlockPartition> {
    if k == 0 {
        return invalid("block count must be positive");
    }
    if k > n {
        return invalid(format!("{k} blocks requested for only {n} observations"));
    }
    let block_len = n / k;
    Ok(BlockPartition {
        n,
        k,
        block_len,
        discarded: n - k * block_len,
    })
}

/// Block count `⌊c·n^β⌋` clamped to `[1, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCount {
    pub k: usize,
    pub clamped: bool,
}

pub fn block_count(n: usize, c: f64, beta: f64) -> Result<BlockCount> {
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("block constant c = {c} must be positive"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return invalid(format!("block exponent β = {beta} must lie in (0, 1)"));
    }
    if n == 0 {
        return invalid("sample size must be positive");
    }
    let k = snapped_floor(c * (n as f64).powf(beta)) as usize;
    let clamped_k = k.clamp(1, n);
    Ok(BlockCount {
        k: clamped_k,
        clamped: clamped_k != k,
    })
}

/// `⌊x⌋`, treating values within 1e-9 (relative) of an integer as that
/// integer. `powf` of perfect powers can land just below the exact value.
pub(crate) fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Open interval `(2γ, β*)` of block exponents under which `⌊n^γ⌋`
/// contaminated observations leave the limit law unchanged; `None` when empty.
pub fn admissible_beta(gamma: f64, beta_star: f64) -> Result<Option<(f64, f64)>> {
    if !(0.0..1.0).contains(&gamma) {
        return invalid(format!("contamination exponent γ = {gamma} must lie in [0, 1)"));
    }
    if !(beta_star > 0.0 && beta_star <= 1.0) {
        return invalid(format!("rate exponent β* = {beta_star} must lie in (0, 1]"));
    }
    let lo = 2.0 * gamma;
    Ok((lo < beta_star).then_some((lo, beta_star)))
}
