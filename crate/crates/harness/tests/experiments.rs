use qoe_harness::config::*;
use qoe_harness::experiments::run;
use qoe_harness::ExperimentReport;

fn small_configs() -> Vec<ExperimentConfig> {
    vec![
        ExperimentConfig::Clt(CltConfig {
            replications: 30,
            n: 900,
            blocks: qoe_core::qoe::BlockRule::Fixed(30),
            ..CltConfig::ols()
        }),
        ExperimentConfig::ContaminationSweep(SweepConfig {
            replications: 6,
            n: 2500,
            blocks: qoe_core::qoe::BlockRule::Fixed(50),
            ..SweepConfig::default()
        }),
        ExperimentConfig::GeomOracle(GeomOracleConfig {
            instances: 12,
            grid: 31,
            ..GeomOracleConfig::default()
        }),
        ExperimentConfig::Functional(FunctionalConfig {
            replications: 40,
            k: 11,
            ..FunctionalConfig::default()
        }),
        ExperimentConfig::SampleQuantileRobustness(SampleQuantileConfig {
            replications: 20,
            n: 1000,
            ..SampleQuantileConfig::default()
        }),
        ExperimentConfig::ConcentrationCheck(ConcentrationConfig {
            replications: 20,
            pilot_blocks: 2000,
            ..ConcentrationConfig::default()
        }),
        ExperimentConfig::LemmaVCheck(LemmaVConfig {
            instances: 15,
            ..LemmaVConfig::default()
        }),
        ExperimentConfig::BahadurCheck(BahadurConfig {
            replications: 15,
            mc_samples: 20_000,
            ks: vec![10, 20],
            ..BahadurConfig::default()
        }),
    ]
}

fn in_pool(threads: usize, cfg: &ExperimentConfig) -> ExperimentReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run(cfg)).unwrap()
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    for cfg in small_configs() {
        let a = in_pool(1, &cfg);
        let b = in_pool(3, &cfg);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "{}", a.experiment);
    }
}

#[test]
fn reports_round_trip_and_flags_recompute() {
    for cfg in small_configs() {
        let r = in_pool(2, &cfg);
        assert!(r.flags_consistent(), "{}", r.experiment);
        assert_eq!(ExperimentReport::from_json(&r.to_json().unwrap()).unwrap(), r, "{}", r.experiment);
        if let Some(m) = &r.moments {
            let d = m.covariance.len();
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(m.covariance[i][j], m.covariance[j][i]);
                }
            }
        }
    }
}

#[test]
fn seed_changes_results() {
    let mut cfg = small_configs().remove(3);
    let a = in_pool(2, &cfg);
    *cfg.seed_mut() += 1;
    let b = in_pool(2, &cfg);
    assert_ne!(a.records, b.records);
}
