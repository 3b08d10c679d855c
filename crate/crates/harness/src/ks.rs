//! One-sample Kolmogorov–Smirnov statistic and asymptotic thresholds.

use crate::error::{config_error, Result};

/// `sup_x |F_m(x) − F(x)|` for the empirical cdf `F_m` of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return config_error("KS statistic of an empty sample");
    }
    if samples.iter().any(|v| v.is_nan()) {
        return config_error("KS statistic of a sample containing NaN");
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let m = x.len() as f64;
    let d = x.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = cdf(v);
        d.max((i + 1) as f64 / m - f).max(f - i as f64 / m)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// Limiting cdf of `√m·D_m`: `1 − 2 Σ_{j≥1} (−1)^{j−1} exp(−2j²x²)`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.2 {
        // the alternating series converges slowly here and the value is < 1e-20
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * x * x).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// `x` with `kolmogorov_cdf(x) = p`, by bisection.
pub fn kolmogorov_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return config_error(format!("Kolmogorov quantile level {p} must lie in (0, 1)"));
    }
    let (mut lo, mut hi) = (0.2, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Asymptotic rejection threshold for `D_m` at significance `level`.
pub fn ks_threshold(m: usize, level: f64) -> Result<f64> {
    if m == 0 {
        return config_error("KS threshold for an empty sample");
    }
    Ok(kolmogorov_quantile(1.0 - level)? / (m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qoe_core::asymptotics::{std_normal_cdf, std_normal_quantile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn stratified_sample_is_within_half_step() {
        for m in [1usize, 7, 100, 1000] {
            let xs: Vec<f64> = (1..=m)
                .map(|i| std_normal_quantile((i as f64 - 0.5) / m as f64).unwrap())
                .collect();
            let d = ks_statistic(&xs, std_normal_cdf).unwrap();
            assert!(d <= 0.5 / m as f64 + 1e-12, "m = {m}: {d}");
        }
    }

    #[test]
    fn identical_samples_give_step_distance() {
        for v in [-1.0, 0.0, 0.3] {
            let d = ks_statistic(&[v; 25], std_normal_cdf).unwrap();
            let f = std_normal_cdf(v);
            assert!((d - f.max(1.0 - f)).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(ks_statistic(&[], std_normal_cdf).is_err());
    }

    #[test]
    fn kolmogorov_quantiles_match_tables() {
        // tabulated asymptotic critical values
        assert!((kolmogorov_quantile(0.99).unwrap() - 1.62762).abs() < 1e-4);
        assert!((kolmogorov_quantile(0.95).unwrap() - 1.35810).abs() < 1e-4);
        assert!((kolmogorov_cdf(1.0) - 0.7300003).abs() < 1e-6);
    }

    #[test]
    fn normal_draws_pass_at_the_tenth_percent_level() {
        // 1.95/√m is above the 99.9% Kolmogorov quantile, so 100 seeds should
        // essentially all pass
        let m = 10_000;
        let passes = (0..100u64)
            .filter(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let xs: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                ks_statistic(&xs, std_normal_cdf).unwrap() < 1.95 / (m as f64).sqrt()
            })
            .count();
        assert!(passes >= 95, "{passes}/100");
    }
}
