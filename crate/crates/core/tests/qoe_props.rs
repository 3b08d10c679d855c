use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qoe_core::asymptotics::c_nu;
use qoe_core::geometry::{geometric_quantile, QuantileDirection, SolverOptions};
use qoe_core::qoe::{
    block_estimates, contaminate, partition, qoe_estimate, Adversary, BaseEstimator, BlockRule,
    ContaminationCount, ContaminationSpec, Dataset, Placement, QoEConfig, QuantileSpec,
};
use qoe_core::{AlphaVector, PointSet};

fn normal_data(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    Dataset::from_flat(xs, d).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn one_per_block_contamination_moves_estimate_by_bounded_gap(
        k in 3usize..40,
        m in 1usize..20,
        l_frac in 0.0f64..1.0,
        alpha in 0.05f64..0.95,
        value in prop_oneof![Just(1e9), Just(-1e9), -1e3f64..1e3],
        seed in any::<u64>(),
    ) {
        let n = k * m + (seed % 3) as usize;
        // the order statistics ⌈kα⌉ − l and ⌊kα + 1⌋ + l must exist
        let ka = k as f64 * alpha;
        let l_max = ((ka.ceil() as usize).saturating_sub(1)).min(k.saturating_sub((ka + 1.0).floor() as usize));
        let l = ((l_frac * (l_max + 1) as f64) as usize).min(l_max);
        let data = normal_data(n, 2, seed);
        let part = partition(n, k).unwrap();
        let spec = ContaminationSpec {
            count: ContaminationCount::Count(l),
            placement: Placement::WorstCaseOnePerBlock,
            adversary: Adversary::FixedValue { value },
        };
        let dirty = contaminate(&data, &spec, &part, seed ^ 0xA5).unwrap();

        let clean_blocks = block_estimates(&data, &BaseEstimator::Mean, &part).unwrap();
        let dirty_blocks = block_estimates(&dirty.data, &BaseEstimator::Mean, &part).unwrap();
        let changed = clean_blocks.values.iter().zip(dirty_blocks.values.iter()).filter(|(a, b)| a != b).count();
        prop_assert!(changed <= l);

        let cfg = QoEConfig::new(BlockRule::Fixed(k), QuantileSpec::ComponentWise(AlphaVector::uniform(alpha).unwrap()));
        let t_clean = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap().value;
        let t_dirty = qoe_estimate(&dirty.data, &BaseEstimator::Mean, &cfg).unwrap().value;
        let lo = ka.ceil() as usize - l;
        let hi = (ka + 1.0).floor() as usize + l;
        for c in 0..2 {
            let s = sorted(clean_blocks.values.coordinate(c));
            let gap = s[hi - 1] - s[lo - 1];
            prop_assert!((t_clean[c] - t_dirty[c]).abs() <= gap + 1e-12, "coord {c}");
        }
    }

    #[test]
    fn geometric_qoe_resists_breakdown(
        k in 5usize..60,
        l_frac in 0.0f64..1.0,
        u_frac in 0.0f64..0.8,
        theta in 0f64..std::f64::consts::TAU,
        seed in any::<u64>(),
    ) {
        // l < k(1 − ‖u‖)/2 contaminated blocks; ν = l/k + ε stays below (1 − ‖u‖)/2
        let u_norm = u_frac;
        let l_max = ((k as f64 * (1.0 - u_norm) / 2.0).ceil() as usize).saturating_sub(1);
        let l = ((l_frac * (l_max + 1) as f64) as usize).min(l_max);
        let nu_max = (1.0 - u_norm) / 2.0;
        let nu = l as f64 / k as f64 + 0.5 * (nu_max - l as f64 / k as f64);
        prop_assume!(nu > 0.0 && nu < nu_max);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta0 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let r = 0.25;
        let pts: Vec<[f64; 2]> = (0..k)
            .map(|i| {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                if i < l {
                    let far = rng.random_range(1e2..1e9);
                    [theta0[0] + far * a.cos(), theta0[1] + far * a.sin()]
                } else {
                    let rad = r * rng.random_range(0.0f64..1.0);
                    [theta0[0] + rad * a.cos(), theta0[1] + rad * a.sin()]
                }
            })
            .collect();
        let dir = QuantileDirection::new(vec![u_norm * theta.cos(), u_norm * theta.sin()]).unwrap();
        let q = geometric_quantile(&PointSet::from_rows(&pts).unwrap(), &dir, SolverOptions::default()).unwrap();
        let err = ((q.point[0] - theta0[0]).powi(2) + (q.point[1] - theta0[1]).powi(2)).sqrt();
        prop_assert!(err <= c_nu(nu, u_norm).unwrap() * r * (1.0 + 1e-9), "err {err}");
    }

    #[test]
    fn zero_contamination_is_bit_exact(k in 1usize..30, m in 1usize..20, seed in any::<u64>(), geo in any::<bool>()) {
        let n = k * m;
        let data = normal_data(n, 2, seed);
        let part = partition(n, k).unwrap();
        let dirty = contaminate(&data, &ContaminationSpec::none(), &part, seed).unwrap();
        let spec = if geo {
            QuantileSpec::Geometric(QuantileDirection::new(vec![0.2, -0.1]).unwrap())
        } else {
            QuantileSpec::median()
        };
        let cfg = QoEConfig::new(BlockRule::Fixed(k), spec);
        let a = qoe_estimate(&data, &BaseEstimator::Mean, &cfg).unwrap();
        let b = qoe_estimate(&dirty.data, &BaseEstimator::Mean, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn seeded_runs_are_deterministic(seed in any::<u64>(), rate in 0.0f64..0.5) {
        let data = normal_data(500, 1, seed);
        let part = partition(500, 20).unwrap();
        let spec = ContaminationSpec {
            count: ContaminationCount::Rate(rate),
            placement: Placement::UniformRandom,
            adversary: Adversary::Dependent { scale: -40.0 },
        };
        let mut cfg = QoEConfig::new(BlockRule::Fixed(20), QuantileSpec::median());
        cfg.shuffle_seed = Some(seed);
        let run = || {
            let c = contaminate(&data, &spec, &part, seed).unwrap();
            qoe_estimate(&c.data, &BaseEstimator::Mean, &cfg).unwrap()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn median_of_means_concentrates() {
    // |T| < 5·√(π/2)/√n in at least 99% of runs
    let (n, k, reps) = (10_000, 100, 300);
    let cfg = QoEConfig::new(BlockRule::Fixed(k), QuantileSpec::median());
    let bound = 5.0 * (std::f64::consts::PI / 2.0).sqrt() / (n as f64).sqrt();
    let hits = (0..reps)
        .filter(|&r| {
            let t = qoe_estimate(&normal_data(n, 1, 1000 + r), &BaseEstimator::Mean, &cfg).unwrap();
            t.value[0].abs() < bound
        })
        .count();
    assert!(hits as f64 >= 0.99 * reps as f64, "{hits}/{reps}");
}

#[test]
fn dataset_round_trips_through_files() {
    let data = normal_data(37, 3, 5).with_columns(vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    data.write_csv(&csv).unwrap();
    assert_eq!(Dataset::read_csv(&csv).unwrap(), data);
    let bin = dir.path().join("d.bin");
    data.write_binary(&bin).unwrap();
    assert_eq!(Dataset::read_binary(&bin).unwrap().as_flat(), data.as_flat());
}
