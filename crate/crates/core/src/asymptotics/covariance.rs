//! Limit covariances of normalised component-wise QoE estimators.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::normal::{bivariate_normal_upper, gaussian_orthant, std_normal_pdf, std_normal_quantile};
use crate::error::{invalid, Result};
use crate::quantile::AlphaVector;

/// Law of the limit `Y` of the normalised block estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitLaw {
    /// Centred Gaussian vector with the given covariance (row-major rows).
    GaussianVector { covariance: Vec<Vec<f64>> },
    /// Standard Brownian motion observed at increasing positive times.
    BrownianMotion { times: Vec<f64> },
}

impl LimitLaw {
    pub fn gaussian(covariance: &DMatrix<f64>) -> Result<Self> {
        let law = Self::GaussianVector {
            covariance: covariance.row_iter().map(|r| r.iter().copied().collect()).collect(),
        };
        law.validate()?;
        Ok(law)
    }

    pub fn brownian(times: Vec<f64>) -> Result<Self> {
        let law = Self::BrownianMotion { times };
        law.validate()?;
        Ok(law)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::GaussianVector { covariance } => covariance.len(),
            Self::BrownianMotion { times } => times.len(),
        }
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        match self {
            Self::GaussianVector { covariance } => {
                let d = covariance.len();
                DMatrix::from_fn(d, d, |i, j| covariance[i][j])
            }
            Self::BrownianMotion { times } => {
                let d = times.len();
                DMatrix::from_fn(d, d, |i, j| times[i].min(times[j]))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::BrownianMotion { times } => {
                if times.is_empty() {
                    return invalid("Brownian law needs at least one time");
                }
                if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[0] < w[1])) || !times.iter().all(|t| t.is_finite()) {
                    return invalid("Brownian times must be positive, finite and strictly increasing");
                }
                Ok(())
            }
            Self::GaussianVector { covariance } => {
                let d = covariance.len();
                if d == 0 || covariance.iter().any(|r| r.len() != d) {
                    return invalid("covariance must be a non-empty square matrix");
                }
                let m = self.covariance();
                if m.iter().any(|v| !v.is_finite()) {
                    return invalid("covariance entries must be finite");
                }
                let scale = m.amax().max(f64::MIN_POSITIVE);
                for i in 0..d {
                    for j in 0..i {
                        if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                            return invalid(format!("covariance is not symmetric at ({i}, {j})"));
                        }
                    }
                }
                let min_eig = m.symmetric_eigenvalues().min();
                if min_eig < -1e-10 * scale {
                    return invalid(format!("covariance is not positive semidefinite (eigenvalue {min_eig})"));
                }
                Ok(())
            }
        }
    }
}

/// `Σ_α` with entries
/// `(P{Y_i > F_i⁻¹(α_i), Y_j > F_j⁻¹(α_j)} − (1−α_i)(1−α_j)) / (f_i(F_i⁻¹(α_i)) f_j(F_j⁻¹(α_j)))`.
pub fn sigma_alpha(law: &LimitLaw, alpha: &AlphaVector) -> Result<DMatrix<f64>> {
    law.validate()?;
    let d = law.dim();
    alpha.check_len(d)?;
    let cov = law.covariance();

    let sd: Vec<f64> = (0..d).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|&s| !(s > 0.0)) {
        return invalid(format!("coordinate {i} has zero variance, so its density vanishes at every quantile"));
    }
    let z: Vec<f64> = (0..d).map(|i| std_normal_quantile(alpha.get(i))).collect::<Result<_>>()?;
    // f_i(F_i⁻¹(α_i)) = φ(z_i)/σ_i
    let dens: Vec<f64> = (0..d).map(|i| std_normal_pdf(z[i]) / sd[i]).collect();
    if let Some(i) = dens.iter().position(|&f| !(f > 0.0)) {
        return invalid(format!("density of coordinate {i} is zero at its quantile"));
    }

    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        let ai = alpha.get(i);
        out[(i, i)] = ai * (1.0 - ai) / (dens[i] * dens[i]);
        for j in 0..i {
            let aj = alpha.get(j);
            let rho = (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0);
            let joint = if ai == 0.5 && aj == 0.5 {
                gaussian_orthant(rho)?
            } else {
                bivariate_normal_upper(z[i], z[j], rho)?
            };
            let v = (joint - (1.0 - ai) * (1.0 - aj)) / (dens[i] * dens[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Limit covariance of the median-of-OLS estimator: `πσ²E[x_i²]` on the
/// diagonal and `2πσ²√(E[x_i²]E[x_j²])(P{Y_i>0, Y_j>0} − 1/4)` off it, with
/// `Y ~ N(0, σ²·Exx)`.
pub fn ols_gamma(exx: &DMatrix<f64>, sigma2: f64) -> Result<DMatrix<f64>> {
    let p = exx.nrows();
    if p == 0 || exx.ncols() != p {
        return invalid("second-moment matrix must be square and non-empty");
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return invalid(format!("σ² = {sigma2} must be positive"));
    }
    if let Some(i) = (0..p).find(|&i| !(exx[(i, i)] > 0.0)) {
        return invalid(format!("second moment E[x_{i}²] must be positive"));
    }
    LimitLaw::gaussian(&exx.scale(sigma2))?;

    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        out[(i, i)] = PI * sigma2 * exx[(i, i)];
        for j in 0..i {
            let root = (exx[(i, i)] * exx[(j, j)]).sqrt();
            let rho = (exx[(i, j)] / root).clamp(-1.0, 1.0);
            let v = 2.0 * PI * sigma2 * root * (gaussian_orthant(rho)? - 0.25);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Limit covariance of `√k·M` at times `t_i, t_j`, where `M` is the
/// point-wise median of `k` independent Brownian paths:
/// `√(st)·arctan(√s/√(t−s))` with `s = min`, `t = max`, and `tπ/2` at `s = t`.
pub fn brownian_qoe_cov(ti: f64, tj: f64) -> Result<f64> {
    if !(ti > 0.0 && tj > 0.0 && ti.is_finite() && tj.is_finite()) {
        return invalid(format!("times must be positive, got {ti} and {tj}"));
    }
    let (s, t) = if ti <= tj { (ti, tj) } else { (tj, ti) };
    if s == t {
        return Ok(t * PI / 2.0);
    }
    Ok((s * t).sqrt() * s.sqrt().atan2((t - s).sqrt()))
}
