//! Linearisation residual of the geometric QoE.
//!
//! With Gaussian data the normalised block means are exactly `N(0, I)`, so
//! the block variables `W_i` are drawn from the limit law directly. `J` is
//! the Hessian of `g(z) = E‖z − Y‖ − ⟨u, z⟩` at its minimiser `r_u`,
//! estimated by central differences of a Monte Carlo `g` with common random
//! numbers.

use nalgebra::{DMatrix, DVector};
use qoe_core::geometry::{geometric_quantile, SolverOptions};
use qoe_core::PointSet;

use super::{normals, replicate};
use crate::config::BahadurConfig;
use crate::error::Result;
use crate::report::{Check, ExperimentReport, Table, Tolerance};
use crate::rng::{stream, Purpose};
use crate::stats::{median, pairwise_sum, slope};

fn norm_at(y: &[f64], z: &[f64]) -> f64 {
    y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Central-difference Hessian of `z ↦ mean_j ‖z − Y_j‖` at `r`.
pub(crate) fn fd_hessian(ys: &[f64], d: usize, r: &[f64], h: f64) -> DMatrix<f64> {
    let shifted = |a: usize, sa: f64, b: usize, sb: f64| {
        let mut z = r.to_vec();
        z[a] += sa * h;
        z[b] += sb * h;
        z
    };
    let mut j = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let terms: Vec<f64> = if a == b {
                let (zp, zm) = (shifted(a, 1.0, a, 0.0), shifted(a, -1.0, a, 0.0));
                ys.chunks_exact(d)
                    .map(|y| norm_at(y, &zp) - 2.0 * norm_at(y, r) + norm_at(y, &zm))
                    .collect()
            } else {
                let zs = [
                    shifted(a, 1.0, b, 1.0),
                    shifted(a, 1.0, b, -1.0),
                    shifted(a, -1.0, b, 1.0),
                    shifted(a, -1.0, b, -1.0),
                ];
                ys.chunks_exact(d)
                    .map(|y| {
                        0.25 * (norm_at(y, &zs[0]) - norm_at(y, &zs[1]) - norm_at(y, &zs[2]) + norm_at(y, &zs[3]))
                    })
                    .collect()
            };
            let v = pairwise_sum(&terms) / (terms.len() as f64 * h * h);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    j
}

/// `J` at `u = 0` for `N(0, I_d)`: `(1 − 1/d)·E[1/‖Y‖]·I`, and `2φ(0)` for `d = 1`.
fn analytic_median_hessian(d: usize) -> Option<f64> {
    use std::f64::consts::PI;
    match d {
        1 => Some((2.0 / PI).sqrt()),
        2 => Some((PI / 2.0).sqrt() / 2.0),
        3 => Some(2.0 / 3.0 * (2.0 / PI).sqrt()),
        _ => None,
    }
}

pub fn run_bahadur_check(cfg: &BahadurConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let d = cfg.u.dim();
    let u = cfg.u.as_slice();
    let opts = SolverOptions::default();
    let mut report = ExperimentReport::new("bahadur_check", cfg.seed, cfg.replications, cfg)?;

    let ys = normals(&mut stream(cfg.seed, Purpose::Hessian, 0), cfg.mc_samples * d);
    let r_u = if u.iter().all(|&v| v == 0.0) {
        vec![0.0; d]
    } else {
        let m = cfg.mc_samples.min(100_000);
        geometric_quantile(&PointSet::from_flat(ys[..m * d].to_vec(), d)?, &cfg.u, opts)?.point
    };
    let j = fd_hessian(&ys, d, &r_u, cfg.fd_step);
    let eig = j.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let j_inv = j.clone().try_inverse();
    let usable = cond.is_finite() && cond <= cfg.cond_max && j_inv.is_some();
    report.diag("hessian_condition", if cond.is_finite() { cond } else { -1.0 });
    for a in 0..d {
        for b in 0..d {
            report.diag(format!("J[{a},{b}]"), j[(a, b)]);
        }
    }
    if let (Some(exact), true) = (analytic_median_hessian(d), r_u.iter().all(|&v| v == 0.0)) {
        let err = (0..d * d)
            .map(|i| {
                let want = if i / d == i % d { exact } else { 0.0 };
                (j[(i / d, i % d)] - want).abs() / exact
            })
            .fold(0.0, f64::max);
        report.check(Check::new("hessian_rel_error", err, 0.02, Tolerance::AtMost).diagnostic());
    }
    if !usable {
        report.inconclusive = true;
        report.notes.push(format!(
            "numerical Hessian unusable (condition {cond:.3e} vs limit {:.1e}); slope not judged",
            cfg.cond_max
        ));
        return Ok(report);
    }
    let j_inv = j_inv.expect("checked above");
    let r_vec = DVector::from_column_slice(&r_u);
    let u_vec = DVector::from_column_slice(u);

    let mut records = Vec::new();
    let mut table = Table::new(&["k", "median_residual", "log_k_over_k", "ratio"]);
    let (mut xs, mut ys_fit) = (Vec::new(), Vec::new());
    for (ki, &k) in cfg.ks.iter().enumerate() {
        let norms = replicate(cfg.replications, |rep| {
            let mut rng = stream(cfg.seed, Purpose::Data, ((ki as u64) << 32) | rep);
            let w = PointSet::from_flat(normals(&mut rng, k * d), d)?;
            let t = DVector::from_vec(geometric_quantile(&w, &cfg.u, opts)?.point);
            let mut infl = DVector::zeros(d);
            for wi in w.iter() {
                let diff = &r_vec - DVector::from_column_slice(wi);
                let n = diff.norm();
                if n > 0.0 {
                    infl += diff / n;
                }
                infl -= &u_vec;
            }
            let resid = &t - &r_vec + &j_inv * infl / k as f64;
            Ok(resid.norm())
        })?;
        let med = median(&norms);
        let lk = (k as f64).ln() / k as f64;
        table.push(format!("k={k}"), vec![k as f64, med, lk, med / lk]);
        xs.push((k as f64).ln());
        ys_fit.push(med.ln());
        records.extend(norms.into_iter().map(|v| vec![k as f64, v]));
    }
    let s = slope(&xs, &ys_fit);
    report.check(Check::new("log_log_slope", s, cfg.slope_max, Tolerance::AtMost));
    report.table = Some(table);
    report.records = records;
    report
        .notes
        .push("no contamination, so the direction in the linearisation is u itself".into());
    Ok(report)
}
