//! Experiment configurations.
//!
//! Every field has a default, and the defaults are the acceptance settings,
//! so an empty config file reproduces them. Files are TOML unless the
//! extension is `.json`. Unknown fields are rejected.

use std::path::Path;

use qoe_core::geometry::QuantileDirection;
use qoe_core::qoe::{Adversary, BlockRule, ContaminationCount, ContaminationSpec, Placement, SignPattern};
use qoe_core::AlphaVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, HarnessError, Result};

pub const DEFAULT_SEED: u64 = 20_240_601;

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return config_error(format!("{name} must be at least 1"));
    }
    Ok(())
}

fn in_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return config_error(format!("{name} = {v} must lie in (0, 1)"));
    }
    Ok(())
}

/// Data-generating model for the CLT experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataModel {
    /// `N(0, σ²I_dim)` rows, block means as base estimator.
    Normal { dim: usize, sigma: f64 },
    /// `y = xᵀβ + σε` with `x ~ N(0, I_p)`, block OLS as base estimator.
    Regression { beta: Vec<f64>, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub blocks: BlockRule,
    pub beta_star: f64,
    pub model: DataModel,
    pub alpha: AlphaVector,
    pub contamination: ContaminationSpec,
    /// Declared growth exponent of a `count` contamination; a fixed count is
    /// otherwise treated as `O(1)`.
    pub gamma: Option<f64>,
    /// When set, the full-sample base estimator's error must exceed this in
    /// every replication.
    pub raw_error_min: Option<f64>,
    pub rel_tol: f64,
    pub offdiag_abs_tol: f64,
    pub ks_level: f64,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 2000,
            n: 10_000,
            blocks: BlockRule::Fixed(100),
            beta_star: 0.5,
            model: DataModel::Normal { dim: 1, sigma: 1.0 },
            alpha: AlphaVector::median(),
            contamination: ContaminationSpec::none(),
            gamma: None,
            raw_error_min: None,
            rel_tol: 0.1,
            offdiag_abs_tol: 0.1,
            ks_level: 0.01,
        }
    }
}

impl CltConfig {
    pub fn contaminated_mean() -> Self {
        Self {
            contamination: ContaminationSpec {
                count: ContaminationCount::Count(10),
                placement: Placement::WorstCaseOnePerBlock,
                adversary: Adversary::Amplitude {
                    magnitude: 1e9,
                    signs: SignPattern::Positive,
                },
            },
            raw_error_min: Some(1e4),
            ..Self::default()
        }
    }

    pub fn ols() -> Self {
        Self {
            model: DataModel::Regression {
                beta: vec![1.0, -0.5],
                sigma: 1.0,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        positive("n", self.n)?;
        in_open_unit("ks_level", self.ks_level)?;
        match &self.model {
            DataModel::Normal { dim, sigma } => {
                positive("model.dim", *dim)?;
                if !(*sigma > 0.0) {
                    return config_error("model.sigma must be positive");
                }
                self.alpha.check_len(*dim)?;
            }
            DataModel::Regression { beta, sigma } => {
                positive("model.beta length", beta.len())?;
                if !(*sigma > 0.0) {
                    return config_error("model.sigma must be positive");
                }
                if self.alpha != AlphaVector::median() {
                    return config_error("the regression model supports only the median (alpha = [0.5])");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub blocks: BlockRule,
    pub beta_star: f64,
    pub gammas: Vec<f64>,
    pub magnitude: f64,
    pub signs: SignPattern,
    /// QoE error bound is `qoe_error_scale/√n` on admissible rows.
    pub qoe_error_scale: f64,
    /// The raw mean's error must exceed this on every contaminated replication.
    pub raw_error_min: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 200,
            n: 10_000,
            blocks: BlockRule::Fixed(100),
            beta_star: 0.5,
            gammas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.6],
            magnitude: 1e9,
            signs: SignPattern::Positive,
            qoe_error_scale: 10.0,
            raw_error_min: 1e4,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        positive("n", self.n)?;
        if self.gammas.is_empty() {
            return config_error("gammas must not be empty");
        }
        if let Some(g) = self.gammas.iter().find(|g| !(0.0..1.0).contains(*g)) {
            return config_error(format!("gamma {g} must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeomOracleConfig {
    pub seed: u64,
    pub instances: usize,
    pub k_max: usize,
    pub u_max: f64,
    /// Grid points per axis at every zoom level.
    pub grid: usize,
    pub zoom_levels: usize,
    pub gap_tol: f64,
    pub residual_tol: f64,
}

impl Default for GeomOracleConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            instances: 200,
            k_max: 7,
            u_max: 0.7,
            grid: 101,
            zoom_levels: 10,
            gap_tol: 1e-6,
            residual_tol: 1e-8,
        }
    }
}

impl GeomOracleConfig {
    pub fn validate(&self) -> Result<()> {
        positive("instances", self.instances)?;
        if !(1..=7).contains(&self.k_max) {
            return config_error(format!("k_max = {} must lie in 1..=7", self.k_max));
        }
        if !(0.0..1.0).contains(&self.u_max) {
            return config_error(format!("u_max = {} must lie in [0, 1)", self.u_max));
        }
        if self.grid < 11 {
            return config_error("grid needs at least 11 points per axis");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalConfig {
    pub seed: u64,
    pub replications: usize,
    pub k: usize,
    pub grid: Vec<f64>,
    pub rel_tol: f64,
    /// Pairs whose target is below this are judged with `small_abs_tol`.
    pub small_target: f64,
    pub small_abs_tol: f64,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 5000,
            k: 101,
            grid: vec![0.25, 0.5, 1.0, 2.0],
            rel_tol: 0.1,
            small_target: 0.05,
            small_abs_tol: 0.05,
        }
    }
}

impl FunctionalConfig {
    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        if self.k.is_multiple_of(2) {
            return config_error(format!("k = {} must be odd", self.k));
        }
        if self.grid.is_empty() || self.grid[0] <= 0.0 || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return config_error("grid must be positive and strictly increasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleQuantileConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub contamination: ContaminationSpec,
    pub alphas: Vec<f64>,
    pub ks_level: f64,
    /// Also run the clean sample and alternating signs, as diagnostics.
    pub variants: bool,
}

impl Default for SampleQuantileConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 2000,
            n: 10_000,
            contamination: ContaminationSpec {
                count: ContaminationCount::Count(15),
                placement: Placement::UniformRandom,
                adversary: Adversary::Amplitude {
                    magnitude: 1e9,
                    signs: SignPattern::Positive,
                },
            },
            alphas: vec![0.5, 0.75],
            ks_level: 0.01,
            variants: true,
        }
    }
}

impl SampleQuantileConfig {
    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        positive("n", self.n)?;
        in_open_unit("ks_level", self.ks_level)?;
        if self.alphas.is_empty() {
            return config_error("alphas must not be empty");
        }
        for &a in &self.alphas {
            in_open_unit("alpha", a)?;
        }
        let l = self.contamination.resolve_count(self.n)?;
        if (l as f64) >= (self.n as f64).sqrt() {
            return config_error(format!("{l} contaminated points is not below √n = {}", (self.n as f64).sqrt()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub seed: u64,
    pub replications: usize,
    pub k: usize,
    pub block_len: usize,
    pub dim: usize,
    pub dof: f64,
    pub nu: f64,
    /// Per-block tail probability the pilot aims ε at.
    pub target_tail: f64,
    pub pilot_blocks: usize,
    pub taus: Vec<f64>,
    pub magnitude: f64,
    pub se_multiplier: f64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 5000,
            k: 50,
            block_len: 20,
            dim: 2,
            dof: 3.0,
            nu: 0.3,
            target_tail: 0.1,
            pilot_blocks: 20_000,
            taus: vec![0.0, 0.1],
            magnitude: 1e9,
            se_multiplier: 3.0,
        }
    }
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        positive("k", self.k)?;
        positive("block_len", self.block_len)?;
        positive("dim", self.dim)?;
        positive("pilot_blocks", self.pilot_blocks)?;
        if !(self.dof > 2.0) {
            return config_error(format!("dof = {} must exceed 2 for a finite variance", self.dof));
        }
        in_open_unit("target_tail", self.target_tail)?;
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return config_error(format!("nu = {} must lie in (0, 1/2)", self.nu));
        }
        if self.taus.iter().any(|t| !(0.0..1.0).contains(t)) {
            return config_error("taus must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaVConfig {
    pub seed: u64,
    pub instances: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub u_max: f64,
    pub resolve_tol: f64,
}

impl Default for LemmaVConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            instances: 100,
            k_min: 5,
            k_max: 15,
            u_max: 0.6,
            resolve_tol: 1e-6,
        }
    }
}

impl LemmaVConfig {
    pub fn validate(&self) -> Result<()> {
        positive("instances", self.instances)?;
        if self.k_min < 2 || self.k_max < self.k_min {
            return config_error("need 2 ≤ k_min ≤ k_max");
        }
        if !(0.0..1.0).contains(&self.u_max) {
            return config_error("u_max must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BahadurConfig {
    pub seed: u64,
    pub replications: usize,
    pub ks: Vec<usize>,
    pub u: QuantileDirection,
    pub mc_samples: usize,
    pub fd_step: f64,
    pub slope_max: f64,
    pub cond_max: f64,
}

impl Default for BahadurConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replications: 400,
            ks: vec![50, 100, 200, 400],
            u: QuantileDirection::zero(2),
            mc_samples: 1_000_000,
            fd_step: 0.1,
            slope_max: -0.8,
            cond_max: 1e6,
        }
    }
}

impl BahadurConfig {
    pub fn validate(&self) -> Result<()> {
        positive("replications", self.replications)?;
        positive("mc_samples", self.mc_samples)?;
        if !(1..=3).contains(&self.u.dim()) {
            return config_error("the direction u must have dimension 1, 2 or 3");
        }
        if self.ks.len() < 2 || self.ks.iter().any(|&k| k < 2) {
            return config_error("ks needs at least two block counts, each ≥ 2");
        }
        if !(self.fd_step > 0.0) {
            return config_error("fd_step must be positive");
        }
        Ok(())
    }
}

/// Any experiment, tagged by `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Clt(CltConfig),
    ContaminationSweep(SweepConfig),
    GeomOracle(GeomOracleConfig),
    Functional(FunctionalConfig),
    SampleQuantileRobustness(SampleQuantileConfig),
    ConcentrationCheck(ConcentrationConfig),
    LemmaVCheck(LemmaVConfig),
    BahadurCheck(BahadurConfig),
}

impl ExperimentConfig {
    pub fn seed_mut(&mut self) -> &mut u64 {
        match self {
            Self::Clt(c) => &mut c.seed,
            Self::ContaminationSweep(c) => &mut c.seed,
            Self::GeomOracle(c) => &mut c.seed,
            Self::Functional(c) => &mut c.seed,
            Self::SampleQuantileRobustness(c) => &mut c.seed,
            Self::ConcentrationCheck(c) => &mut c.seed,
            Self::LemmaVCheck(c) => &mut c.seed,
            Self::BahadurCheck(c) => &mut c.seed,
        }
    }
}

/// Parses a config from text; `json` selects the format.
pub fn parse_config<T: DeserializeOwned>(text: &str, json: bool, origin: &str) -> Result<T> {
    if json {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("{origin}: {e}")))
    } else {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("{origin}: {e}")))
    }
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse_config(&text, json, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let c: CltConfig = parse_config("", false, "t").unwrap();
        assert_eq!(c, CltConfig::default());
        let c: BahadurConfig = parse_config("{}", true, "t").unwrap();
        assert_eq!(c, BahadurConfig::default());
    }

    #[test]
    fn toml_overrides_and_nested_enums() {
        let text = r#"
            seed = 7
            replications = 10
            blocks = { fixed = 20 }
            model = { kind = "regression", beta = [1.0, 2.0], sigma = 0.5 }
            [contamination]
            count = { count = 3 }
            placement = "worst_case_one_per_block"
            adversary = { kind = "amplitude", magnitude = 1e9, signs = "alternating" }
        "#;
        let c: CltConfig = parse_config(text, false, "t").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.blocks, BlockRule::Fixed(20));
        assert_eq!(c.contamination.count, ContaminationCount::Count(3));
        assert!(matches!(c.model, DataModel::Regression { .. }));
        c.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field_and_line() {
        let err = parse_config::<CltConfig>("seed = 1\nreplicatons = 3\n", false, "c.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("replicatons") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        let err = parse_config::<CltConfig>("{\"n\": \"ten\"}", true, "c.json").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn tagged_config_round_trips() {
        let c = ExperimentConfig::Functional(FunctionalConfig::default());
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"experiment\":\"functional\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), c);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let c = FunctionalConfig { k: 100, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SampleQuantileConfig {
            contamination: ContaminationSpec {
                count: ContaminationCount::Count(100),
                ..SampleQuantileConfig::default().contamination
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(GeomOracleConfig { k_max: 9, ..Default::default() }.validate().is_err());
    }
}
