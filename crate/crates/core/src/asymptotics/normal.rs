//! Standard normal functions and bivariate normal rectangle probabilities.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{invalid, Result};

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `Φ⁻¹(p)` from the inverse complementary error function, polished by
/// Newton steps against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("normal quantile level {p} is not in (0, 1)"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let pdf = std_normal_pdf(z);
        if !(pdf > 0.0) {
            break;
        }
        z -= (std_normal_cdf(z) - p) / pdf;
    }
    Ok(z)
}

/// `P(Z₁ > 0, Z₂ > 0) = 1/4 + arcsin(ρ)/(2π)` for a standard bivariate
/// normal with correlation `ρ`.
pub fn gaussian_orthant(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(0.25 + rho.asin() / (2.0 * PI))
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        invalid(format!("correlation {rho} is outside [-1, 1]"))
    }
}

/// `P(Z₁ > a, Z₂ > b)` for a standard bivariate normal with correlation `ρ`.
///
/// Uses `Φ₂(h, k; ρ) = Φ(h)Φ(k) + (1/2π) ∫₀^{arcsin ρ} exp(−(h² − 2hk sinθ + k²)/(2cos²θ)) dθ`
/// with `h = −a, k = −b`; the angular substitution removes the endpoint
/// singularity of the density at `|ρ| → 1`. The integral is evaluated by
/// adaptive Gauss–Legendre quadrature to absolute tolerance `1e-13`.
pub fn bivariate_normal_upper(a: f64, b: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if a == 0.0 && b == 0.0 {
        return gaussian_orthant(rho);
    }
    let (h, k) = (-a, -b);
    let base = std_normal_cdf(h) * std_normal_cdf(k);
    let upper = rho.asin();
    if upper == 0.0 {
        return Ok(base);
    }
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let c2 = c * c;
        if c2 <= 0.0 {
            return if h == k { (-0.5 * h * h).exp() } else { 0.0 };
        }
        (-(h * h - 2.0 * h * k * s + k * k) / (2.0 * c2)).exp()
    };
    let integral = adaptive_gauss_legendre(&integrand, 0.0, upper, 1e-13);
    Ok((base + integral / (2.0 * PI)).clamp(0.0, 1.0))
}

const GL_ORDER: usize = 10;

/// `GL_ORDER`-point Gauss–Legendre nodes and weights on [-1, 1], computed by
/// Newton iteration on the Legendre polynomial.
fn gauss_legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=n {
                        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gauss_legendre_rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Bisects until the whole-interval and two-halves estimates agree to `tol`.
pub(crate) fn adaptive_gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss_legendre(f, a, m);
        let right = gauss_legendre(f, m, b);
        if (left + right - whole).abs() <= tol || depth >= 40 {
            left + right
        } else {
            go(f, a, m, left, 0.5 * tol, depth + 1) + go(f, m, b, right, 0.5 * tol, depth + 1)
        }
    }
    let whole = gauss_legendre(f, a, b);
    go(f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_examples() {
        assert_eq!(gaussian_orthant(0.0).unwrap(), 0.25);
        assert!((gaussian_orthant(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((gaussian_orthant(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((gaussian_orthant(-1.0).unwrap()).abs() < 1e-15);
        assert!(gaussian_orthant(1.0 + 1e-12).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn cdf_reference_values() {
        // 25-digit reference values
        assert!((std_normal_cdf(0.5) - 0.6914624612740131036377046).abs() < 1e-16);
        assert!((std_normal_cdf(-2.5) - 0.006209665325776135166978).abs() < 1e-17);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-10, 0.01, 0.25, 0.5, 0.75, 0.975, 1.0 - 1e-9] {
            let z = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(z) - p).abs() <= 1e-14 * p.max(1e-3), "p = {p}");
        }
        assert!((std_normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-13);
        assert!(std_normal_quantile(1.0).is_err());
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        // exact for degree ≤ 19
        let v = gauss_legendre(&|x: f64| x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = gauss_legendre_rule().iter().map(|w| w.1).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    /// Independent oracle: `P(X > a, Y > b) = ∫_a^∞ φ(x) Φ̄((b − ρx)/√(1−ρ²)) dx`
    /// by composite Simpson on a long, fine grid.
    fn upper_by_conditioning(a: f64, b: f64, rho: f64) -> f64 {
        let s = (1.0 - rho * rho).sqrt();
        let hi = 12.0f64.max(a + 12.0);
        let n = 200_000;
        let h = (hi - a) / n as f64;
        let f = |x: f64| std_normal_pdf(x) * (1.0 - std_normal_cdf((b - rho * x) / s));
        let mut acc = f(a) + f(hi);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn rectangle_matches_conditioning_oracle() {
        for &(a, b, rho) in &[
            (0.6744897501960817, 0.6744897501960817, 0.5),
            (0.3, -1.2, -0.7),
            (-0.5, 0.25, 0.95),
            (1.5, 0.2, 0.0),
            (0.0, 1.0, 0.3),
            (-2.0, -2.0, -0.99),
        ] {
            let q = bivariate_normal_upper(a, b, rho).unwrap();
            let o = upper_by_conditioning(a, b, rho);
            assert!((q - o).abs() < 1e-10, "({a},{b},{rho}): {q} vs {o}");
        }
    }

    #[test]
    fn rectangle_limits() {
        let a = 0.8;
        // ρ = 1: P(Z > a)
        let q = bivariate_normal_upper(a, a, 1.0).unwrap();
        assert!((q - (1.0 - std_normal_cdf(a))).abs() < 1e-10);
        // ρ = −1 with a = −b: P(Z > a, −Z > −a) = 0
        let q = bivariate_normal_upper(a, -a, -1.0).unwrap();
        assert!(q.abs() < 1e-10);
    }
}
