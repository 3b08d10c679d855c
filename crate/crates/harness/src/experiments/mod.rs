//! Experiment runners.

mod bahadur;
mod clt;
mod conc;
mod functional;
mod geomq;
mod lemv;
mod squantile;
mod sweep;

pub use bahadur::run_bahadur_check;
pub use clt::{block_exponent, run_clt};
pub use conc::run_concentration_check;
pub use functional::run_functional;
pub use geomq::{grid_minimum, run_geom_oracle};
pub use lemv::run_lemma_v_check;
pub use squantile::run_sample_quantile_robustness;
pub use sweep::run_contamination_sweep;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::ExperimentReport;

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config {
        ExperimentConfig::Clt(c) => run_clt(c),
        ExperimentConfig::ContaminationSweep(c) => run_contamination_sweep(c),
        ExperimentConfig::GeomOracle(c) => run_geom_oracle(c),
        ExperimentConfig::Functional(c) => run_functional(c),
        ExperimentConfig::SampleQuantileRobustness(c) => run_sample_quantile_robustness(c),
        ExperimentConfig::ConcentrationCheck(c) => run_concentration_check(c),
        ExperimentConfig::LemmaVCheck(c) => run_lemma_v_check(c),
        ExperimentConfig::BahadurCheck(c) => run_bahadur_check(c),
    }
}

/// Runs `f` for every replication index on the current rayon pool and
/// returns the results in index order.
pub(crate) fn replicate<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

pub(crate) fn normals(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}
