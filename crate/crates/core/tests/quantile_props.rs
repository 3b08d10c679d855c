use proptest::prelude::*;
use qoe_core::quantile::{
    componentwise_quantile, pointwise_path_quantile, univariate_quantile, univariate_quantile_lower,
};
use qoe_core::{AlphaVector, PathSet, PointSet};

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![
        0.001f64..0.999,
        // levels where kα is an integer for common k
        prop::sample::select(vec![0.1, 0.2, 0.25, 0.3, 0.5, 0.6, 0.75, 0.9]),
    ]
}

/// Equal-length pairs with occasional ties.
fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|k| {
        let v = prop_oneof![-1e3f64..1e3, (-5i32..5).prop_map(f64::from)];
        (prop::collection::vec(v.clone(), k), prop::collection::vec(v, k))
    })
}

fn sup_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn q_is_lipschitz_in_sup_norm((x, y) in pair(), a in alpha()) {
        let d = (univariate_quantile(&x, a).unwrap() - univariate_quantile(&y, a).unwrap()).abs();
        prop_assert!(d <= sup_dist(&x, &y));
    }

    #[test]
    fn q_lower_is_lipschitz_in_sup_norm((x, y) in pair(), a in alpha()) {
        let d = (univariate_quantile_lower(&x, a).unwrap() - univariate_quantile_lower(&y, a).unwrap()).abs();
        prop_assert!(d <= sup_dist(&x, &y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn q_lower_is_a_qualifying_data_point((x, _) in pair(), a in alpha()) {
        let q = univariate_quantile_lower(&x, a).unwrap();
        prop_assert!(x.contains(&q));
        let k = x.len() as f64;
        let le = x.iter().filter(|&&v| v <= q).count() as f64;
        let ge = x.iter().filter(|&&v| v >= q).count() as f64;
        prop_assert!(le >= k * a - 1e-12);
        prop_assert!(ge >= k * (1.0 - a) - 1e-12);
        // nothing smaller qualifies
        for &c in x.iter().filter(|&&c| c < q) {
            let le = x.iter().filter(|&&v| v <= c).count() as f64;
            let ge = x.iter().filter(|&&v| v >= c).count() as f64;
            prop_assert!(!(le >= k * a - 1e-12 && ge >= k * (1.0 - a) - 1e-12));
        }
    }

    #[test]
    fn q_is_equivariant(
        (x, _) in pair(),
        a in alpha(),
        c in prop_oneof![Just(0.0), Just(1.0), Just(2.0), Just(0.5), 0.0f64..10.0],
        s in -100f64..100.0,
    ) {
        let q = univariate_quantile(&x, a).unwrap();
        let moved: Vec<f64> = x.iter().map(|v| c * (v - s)).collect();
        let qm = univariate_quantile(&moved, a).unwrap();
        let want = c * (q - s);
        prop_assert!((qm - want).abs() <= 1e-12 * (1.0 + want.abs() + c * s.abs()));
        // power-of-two scalings and zero shift are exact
        if c == 2.0 || c == 0.5 || c == 0.0 {
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            prop_assert_eq!(univariate_quantile(&scaled, a).unwrap(), c * q);
        }
    }

    #[test]
    fn q_is_monotone_in_alpha((x, _) in pair(), a in alpha(), b in alpha()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(univariate_quantile(&x, lo).unwrap() <= univariate_quantile(&x, hi).unwrap());
        prop_assert!(univariate_quantile_lower(&x, lo).unwrap() <= univariate_quantile_lower(&x, hi).unwrap());
    }

    #[test]
    fn q_stays_within_range((x, _) in pair(), a in alpha()) {
        let q = univariate_quantile(&x, a).unwrap();
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= q && q <= hi);
    }

    #[test]
    fn componentwise_is_euclidean_lipschitz(
        k in 1usize..15,
        d in 1usize..5,
        seed in prop::collection::vec(-50f64..50.0, 2 * 15 * 5),
        alphas in prop::collection::vec(alpha(), 5),
    ) {
        let x: Vec<f64> = seed[..k * d].to_vec();
        let z: Vec<f64> = seed[15 * 5..15 * 5 + k * d].to_vec();
        let a = AlphaVector::new(alphas[..d].to_vec()).unwrap();
        let qx = componentwise_quantile(&PointSet::from_flat(x.clone(), d).unwrap(), &a).unwrap();
        let qz = componentwise_quantile(&PointSet::from_flat(z.clone(), d).unwrap(), &a).unwrap();
        let lhs = qx.iter().zip(&qz).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let rhs = x.iter().zip(&z).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn path_quantile_is_sup_norm_lipschitz(
        k in 1usize..12,
        m in 1usize..8,
        seed in prop::collection::vec(-10f64..10.0, 2 * 12 * 8),
        a in alpha(),
    ) {
        let grid: Vec<f64> = (0..m).map(|j| j as f64 * 0.5).collect();
        let f: Vec<Vec<f64>> = (0..k).map(|i| seed[i * m..(i + 1) * m].to_vec()).collect();
        let g: Vec<Vec<f64>> = (0..k).map(|i| seed[96 + i * m..96 + (i + 1) * m].to_vec()).collect();
        let alpha = AlphaVector::uniform(a).unwrap();
        let qf = pointwise_path_quantile(&PathSet::new(grid.clone(), f.clone()).unwrap(), &alpha).unwrap();
        let qg = pointwise_path_quantile(&PathSet::new(grid, g.clone()).unwrap(), &alpha).unwrap();
        let lhs = sup_dist(&qf, &qg);
        let rhs = f.iter().zip(&g).map(|(a, b)| sup_dist(a, b)).fold(0.0, f64::max);
        prop_assert!(lhs <= rhs);
    }
}

#[test]
fn worked_examples() {
    assert_eq!(univariate_quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
    assert_eq!(univariate_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.5);
    assert_eq!(univariate_quantile(&[10.0, 20.0, 30.0, 40.0, 50.0], 0.25).unwrap(), 20.0);
    assert_eq!(univariate_quantile_lower(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.0);
    assert_eq!(univariate_quantile_lower(&[5.0], 0.9).unwrap(), 5.0);

    let p = PointSet::from_rows(&[[0.0, 0.0], [1.0, 10.0], [2.0, 20.0], [3.0, 30.0]]).unwrap();
    let q = componentwise_quantile(&p, &AlphaVector::new(vec![0.25, 0.75]).unwrap()).unwrap();
    assert_eq!(q, vec![0.5, 25.0]);

    let paths: Vec<Vec<f64>> = (1..=5).map(|i| vec![0.0, 0.5 * i as f64, i as f64]).collect();
    let ps = PathSet::new(vec![0.0, 0.5, 1.0], paths).unwrap();
    assert_eq!(pointwise_path_quantile(&ps, &AlphaVector::median()).unwrap(), vec![0.0, 1.5, 3.0]);
}
