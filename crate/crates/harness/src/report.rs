//! Experiment reports.
//!
//! A report records raw statistics next to the tolerance each check was
//! judged with, so every flag can be recomputed from the JSON alone.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::stats::to_rows;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|observed − target| ≤ r·|target|`
    Relative(f64),
    /// `|observed − target| ≤ a`
    Absolute(f64),
    /// `observed ≤ target`
    AtMost,
    /// `observed ≥ target`
    AtLeast,
}

impl Tolerance {
    pub fn accepts(&self, observed: f64, target: f64) -> bool {
        match *self {
            Self::Relative(r) => (observed - target).abs() <= r * target.abs(),
            Self::Absolute(a) => (observed - target).abs() <= a,
            Self::AtMost => observed <= target,
            Self::AtLeast => observed >= target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: Tolerance,
    pub passed: bool,
    /// Diagnostic checks are reported but do not decide the verdict.
    pub gating: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, target: f64, tolerance: Tolerance) -> Self {
        Self {
            name: name.into(),
            observed,
            target,
            tolerance,
            passed: tolerance.accepts(observed, target),
            gating: true,
        }
    }

    pub fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn recompute(&self) -> bool {
        self.tolerance.accepts(self.observed, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub labels: Vec<String>,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub target: Vec<Vec<f64>>,
}

impl Moments {
    pub fn new(labels: Vec<String>, mean: Vec<f64>, covariance: &DMatrix<f64>, target: &DMatrix<f64>) -> Self {
        Self {
            labels,
            mean,
            covariance: to_rows(covariance),
            target: to_rows(target),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRecord {
    pub label: String,
    pub statistic: f64,
    pub samples: usize,
    pub threshold: f64,
}

/// Rows of named numeric columns with a text label per row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, label: impl Into<String>, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.labels.push(label.into());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub replications: usize,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<Moments>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ks: Vec<KsRecord>,
    pub checks: Vec<Check>,
    /// Set when a precondition of the experiment could not be met; gating
    /// checks are then reported but the verdict is not a failure.
    #[serde(default)]
    pub inconclusive: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// Per-replication values, one row per replication.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, replications: usize, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            experiment: experiment.to_string(),
            seed,
            replications,
            config: serde_json::to_value(config)?,
            moments: None,
            ks: Vec::new(),
            checks: Vec::new(),
            inconclusive: false,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            table: None,
            records: Vec::new(),
            wall_clock_secs: None,
        })
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn diag(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    /// True when every gating check passed, or the run was inconclusive.
    pub fn passed(&self) -> bool {
        self.inconclusive || self.checks.iter().filter(|c| c.gating).all(|c| c.passed)
    }

    /// True when every stored flag matches its recomputation.
    pub fn flags_consistent(&self) -> bool {
        self.checks.iter().all(|c| c.passed == c.recompute())
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| HarnessError::io(path, e))
    }

    /// Writes the table when there is one, else `rep,coord,value` rows.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if let Some(t) = &self.table {
            let mut header = vec!["label".to_string()];
            header.extend(t.columns.iter().cloned());
            w.write_record(&header)?;
            for (label, row) in t.labels.iter().zip(&t.rows) {
                let mut rec = vec![label.clone()];
                rec.extend(row.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        } else {
            w.write_record(["rep", "coord", "value"])?;
            for (rep, row) in self.records.iter().enumerate() {
                for (coord, v) in row.iter().enumerate() {
                    w.write_record([rep.to_string(), coord.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!("{} (seed {}, {} replications)\n", self.experiment, self.seed, self.replications);
        for c in &self.checks {
            let flag = match (c.passed, c.gating) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "WARN",
            };
            s.push_str(&format!(
                "  {flag} {}: observed {:.6e}, target {:.6e}, {:?}\n",
                c.name, c.observed, c.target, c.tolerance
            ));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        if self.inconclusive {
            s.push_str("  verdict: INCONCLUSIVE\n");
        } else {
            s.push_str(&format!("  verdict: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", 7, 3, &serde_json::json!({"n": 10, "alpha": 0.1})).unwrap();
        r.check(Check::new("var", 1.55, std::f64::consts::FRAC_PI_2, Tolerance::Relative(0.1)));
        r.check(Check::new("ks", 0.05, 0.0364, Tolerance::AtMost).diagnostic());
        r.diag("x", 0.1 + 0.2);
        r.records = vec![vec![0.1, 1e-300], vec![-3.0, 2.5e10], vec![1.0 / 3.0, 0.0]];
        let mut t = Table::new(&["a", "b"]);
        t.push("row", vec![1.0, 2.0]);
        r.table = Some(t);
        r
    }

    #[test]
    fn json_round_trips_exactly() {
        let r = sample();
        assert_eq!(ExperimentReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn verdict_ignores_diagnostics() {
        let r = sample();
        assert!(r.passed());
        assert!(r.flags_consistent());
        let mut bad = r.clone();
        bad.checks[0].observed = 2.0;
        assert!(!bad.flags_consistent());
    }

    #[test]
    fn tolerances() {
        assert!(Tolerance::Relative(0.1).accepts(1.09, 1.0));
        assert!(!Tolerance::Relative(0.1).accepts(1.11, 1.0));
        assert!(Tolerance::Absolute(0.1).accepts(-0.1, 0.0));
        assert!(Tolerance::AtMost.accepts(1.0, 1.0));
        assert!(!Tolerance::AtLeast.accepts(0.9, 1.0));
    }

    #[test]
    fn csv_records() {
        let mut r = sample();
        r.table = None;
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("rep,coord,value\n0,0,0.1\n"));
        assert_eq!(s.lines().count(), 7);
    }
}
