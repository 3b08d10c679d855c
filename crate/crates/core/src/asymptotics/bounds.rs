//! Displacement constant and block-level concentration bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `C_ν = 2(1−ν)/(1−2ν−‖u‖)`: if fewer than `νk` points lie outside a ball
/// of radius `r` around `z`, the geometric quantile is within `C_ν·r` of `z`.
pub fn c_nu(nu: f64, u_norm: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u_norm) {
        return invalid(format!("‖u‖ = {u_norm} must lie in [0, 1)"));
    }
    if !(nu > 0.0 && nu < (1.0 - u_norm) / 2.0) {
        return invalid(format!("ν = {nu} must lie in (0, {})", (1.0 - u_norm) / 2.0));
    }
    Ok(2.0 * (1.0 - nu) / (1.0 - 2.0 * nu - u_norm))
}

/// `ψ(s; p) = (1−s)·ln((1−s)/(1−p)) + s·ln(s/p)`.
pub fn psi(s: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < s && s < 0.5) {
        return invalid(format!("ψ(s; p) needs 0 < p < s < 1/2, got s = {s}, p = {p}"));
    }
    Ok(psi_unchecked(s, p))
}

fn psi_unchecked(s: f64, p: f64) -> f64 {
    // ln_1p keeps the first term accurate when s is close to p
    (1.0 - s) * ((p - s) / (1.0 - p)).ln_1p() + s * (s / p).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    pub nu: f64,
    /// Per-block probability of missing the target by more than `ε`.
    pub p: f64,
    /// Fraction of adversarial blocks.
    #[serde(default)]
    pub tau: f64,
    pub k: usize,
    #[serde(default)]
    pub u_norm: f64,
}

impl ConcentrationParams {
    pub fn validate(&self) -> Result<()> {
        let Self { nu, p, tau, u_norm, .. } = *self;
        if !(0.0..1.0).contains(&u_norm) {
            return invalid(format!("‖u‖ = {u_norm} must lie in [0, 1)"));
        }
        if !(p > 0.0 && p < nu && nu < (1.0 - u_norm) / 2.0) {
            return invalid(format!(
                "need 0 < p < ν < (1−‖u‖)/2, got p = {p}, ν = {nu}, ‖u‖ = {u_norm}"
            ));
        }
        let tau_max = (nu - p) / (1.0 - p);
        if !(tau >= 0.0 && tau <= tau_max) {
            return invalid(format!("τ = {tau} must lie in [0, {tau_max}]"));
        }
        Ok(())
    }
}

/// `exp(−k(1−τ)·ψ((ν−τ)/(1−τ); p))`, an upper bound on the probability that
/// the geometric quantile of `k` blocks misses by more than `C_ν·ε`.
pub fn concentration_bound(cp: &ConcentrationParams) -> Result<f64> {
    cp.validate()?;
    if cp.k == 0 {
        return Ok(1.0);
    }
    let s = (cp.nu - cp.tau) / (1.0 - cp.tau);
    // at the upper end of the τ range s equals p and the bound is trivial
    let exponent = if s <= cp.p { 0.0 } else { psi_unchecked(s, cp.p) };
    Ok((-(cp.k as f64) * (1.0 - cp.tau) * exponent).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_nu_examples() {
        assert!((c_nu(1e-12, 0.0).unwrap() - 2.0).abs() < 1e-10);
        assert!((c_nu(0.25, 0.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((c_nu(0.1, 0.3).unwrap() - 3.6).abs() < 1e-14);
        assert!(c_nu(0.35, 0.3).is_err());
        assert!(c_nu(0.0, 0.0).is_err());
        assert!(c_nu(0.1, 1.0).is_err());
    }

    #[test]
    fn c_nu_monotone_and_divergent() {
        let mut prev = 0.0;
        for i in 1..100 {
            let c = c_nu(0.25 * i as f64 / 100.0, 0.5).unwrap();
            assert!(c > prev);
            prev = c;
        }
        assert!(c_nu(0.25 - 1e-9, 0.5).unwrap() > 1e8);
        assert!(c_nu(0.1, 0.2).unwrap() > c_nu(0.1, 0.1).unwrap());
    }

    #[test]
    fn psi_examples() {
        let oracle = 0.7 * (0.7f64 / 0.9).ln() + 0.3 * 3f64.ln();
        assert!((psi(0.3, 0.1).unwrap() - oracle).abs() < 1e-15);
        assert!((psi(0.3, 0.1).unwrap() - 0.15366).abs() < 1e-5);
        assert!(psi(0.1 + 1e-12, 0.1).unwrap() <= 1e-20);
        assert!(psi(0.4, 0.1).unwrap() > psi(0.3, 0.1).unwrap());
        assert!(psi(0.1, 0.1).is_err());
        assert!(psi(0.5, 0.1).is_err());
    }

    #[test]
    fn bound_examples() {
        let cp = ConcentrationParams { nu: 0.3, p: 0.1, tau: 0.0, k: 50, u_norm: 0.0 };
        let b = concentration_bound(&cp).unwrap();
        assert!((b - (-50.0 * psi(0.3, 0.1).unwrap()).exp()).abs() < 1e-18);
        assert_eq!(concentration_bound(&ConcentrationParams { k: 0, ..cp }).unwrap(), 1.0);

        let tau_max = (0.3 - 0.1) / 0.9;
        let at_max = ConcentrationParams { tau: tau_max, ..cp };
        assert!((concentration_bound(&at_max).unwrap() - 1.0).abs() < 1e-12);
        assert!(concentration_bound(&ConcentrationParams { tau: tau_max + 1e-6, ..cp }).is_err());
        assert!(concentration_bound(&ConcentrationParams { p: 0.3, ..cp }).is_err());
    }

    #[test]
    fn bound_decreases_in_k() {
        let mut prev = 1.0;
        for k in 1..200 {
            let b = concentration_bound(&ConcentrationParams { nu: 0.3, p: 0.1, tau: 0.05, k, u_norm: 0.1 })
                .unwrap();
            assert!(b > 0.0 && b < prev);
            prev = b;
        }
    }
}
