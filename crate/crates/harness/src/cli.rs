//! Command-line entry point.
//!
//! Exit codes: 0 when every gating check passes, 1 on a failed check or a
//! runtime failure, 2 on a configuration or argument error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use qoe_core::geometry::{geometric_quantile, QuantileDirection, SolverOptions};
use qoe_core::PointSet;
use serde::de::DeserializeOwned;

use crate::config::{load_config, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::experiments::run;
use crate::report::ExperimentReport;

#[derive(Debug, Parser)]
#[command(name = "qoe", version, about = "Quantile-of-estimators experiments")]
pub struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML or JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write per-replication rows (or the sweep table) as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Keep per-replication records in the JSON report.
    #[arg(long, global = true)]
    pub records: bool,
    /// Record wall-clock time in the report (makes reports differ run to run).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal limit of the component-wise QoE (mean or OLS blocks).
    Clt,
    /// Contamination sweep over γ, QoE against the raw mean.
    Sweep,
    /// Geometric-quantile solver against a grid oracle.
    Geomq,
    /// Point-wise median of Brownian paths.
    Functional,
    /// Contaminated sample quantile against its normal limit.
    Squantile,
    /// Concentration bound of the geometric median-of-means.
    Conc,
    /// Re-parametrised direction after replacing points.
    Lemv,
    /// Linearisation residual of the geometric QoE.
    Bahadur,
    /// Geometric quantile of the points in a CSV file.
    Solve {
        /// One point per row, comma separated, optional header.
        #[arg(long)]
        points: PathBuf,
        /// Direction, e.g. `0.2,-0.1`; defaults to the median.
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
    },
}

fn experiment_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
        path.map_or_else(|| Ok(T::default()), load_config)
    }
    let p = cli.config.as_deref();
    let mut cfg = match cli.command {
        Command::Clt => ExperimentConfig::Clt(load(p)?),
        Command::Sweep => ExperimentConfig::ContaminationSweep(load(p)?),
        Command::Geomq => ExperimentConfig::GeomOracle(load(p)?),
        Command::Functional => ExperimentConfig::Functional(load(p)?),
        Command::Squantile => ExperimentConfig::SampleQuantileRobustness(load(p)?),
        Command::Conc => ExperimentConfig::ConcentrationCheck(load(p)?),
        Command::Lemv => ExperimentConfig::LemmaVCheck(load(p)?),
        Command::Bahadur => ExperimentConfig::BahadurCheck(load(p)?),
        Command::Solve { .. } => return Ok(None),
    };
    if let Some(seed) = cli.seed {
        *cfg.seed_mut() = seed;
    }
    Ok(Some(cfg))
}

fn read_points(path: &Path) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(HarnessError::Config(format!("{}: line {}: {e}", path.display(), line + 1)));
            }
        }
    }
    Ok(PointSet::from_rows(&rows)?)
}

fn parse_direction(text: Option<&str>, d: usize) -> Result<QuantileDirection> {
    match text {
        None => Ok(QuantileDirection::zero(d)),
        Some(s) => {
            let u = s
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| HarnessError::Config(format!("--u: {e}")))?;
            Ok(QuantileDirection::new(u)?)
        }
    }
}

fn solve(points: &Path, u: Option<&str>) -> Result<i32> {
    let pts = read_points(points)?;
    let dir = parse_direction(u, pts.dim())?;
    let r = geometric_quantile(&pts, &dir, SolverOptions::default())?;
    let coords: Vec<String> = r.point.iter().map(|v| format!("{}", v + 0.0)).collect();
    println!("({})", coords.join(","));
    eprintln!("status {:?}, residual {:e}, {} iterations", r.status, r.residual, r.iterations);
    Ok(0)
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Command::Solve { points, u } = &cli.command {
        return solve(points, u.as_deref());
    }
    let cfg = experiment_config(cli)?.expect("experiment subcommand");
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(HarnessError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut report: ExperimentReport = pool.install(|| run(&cfg))?;
    if cli.timing {
        report.wall_clock_secs = Some(start.elapsed().as_secs_f64());
    }
    if let Some(path) = &cli.csv {
        report.write_csv_file(path)?;
    }
    if !cli.records {
        report.records.clear();
    }
    match &cli.out {
        Some(path) => report.write_json(path)?,
        None => print!("{}", report.to_json()?),
    }
    eprint!("{}", report.summary());
    Ok(if report.passed() { 0 } else { 1 })
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
