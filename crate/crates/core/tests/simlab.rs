use mixpath::estimators::EstimatorKind;
use mixpath::simlab::{rate_experiment, validate_mom_indicators, IndicatorGrid};
use mixpath::simlab::presets::{preset_ids, run_preset, PresetOptions};
use mixpath::simlab::{run_study, CellSpec, CoverageMethod, Generator, StudyConfig};
use mixpath::Error;

fn small_study(seed: u64) -> StudyConfig {
    let cells = StudyConfig::grid(&[0.325], &[0.25, 0.75], &[100, 400], 1.0).unwrap();
    let mut cfg = StudyConfig::new(cells, 100, vec![EstimatorKind::MleKnownVar, EstimatorKind::MomKnownVar], seed);
    cfg.inference = vec![CoverageMethod::MleWald, CoverageMethod::WaldInversion];
    cfg.keep_replicates = true;
    cfg
}

#[test]
fn study_is_independent_of_thread_count() {
    let cfg = small_study(3);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_study(&cfg).unwrap());
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_study(&cfg).unwrap());
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&three).unwrap());
    let other = run_study(&small_study(4)).unwrap();
    assert_ne!(one.cells, other.cells);
}

#[test]
fn frequencies_partition_and_coverage_is_a_rate() {
    let r = run_study(&small_study(5)).unwrap();
    for cell in &r.cells {
        for e in &cell.estimators {
            let s: f64 = e.pathology.freq.iter().sum();
            assert!((s - 1.0).abs() <= f64::EPSILON, "{s}");
            assert_eq!(e.pathology.count.iter().sum::<usize>(), e.ok);
        }
        for c in &cell.coverage {
            assert!((0.0..=1.0).contains(&c.coverage));
        }
    }
    assert_eq!(r.replicates.as_ref().unwrap().len(), 400);
}

#[test]
fn doubling_reps_is_self_consistent() {
    let mut a = small_study(6);
    a.keep_replicates = false;
    let mut b = a.clone();
    b.reps = 200;
    let (ra, rb) = (run_study(&a).unwrap(), run_study(&b).unwrap());
    let mut checks = 0;
    let mut ok = 0;
    for (ca, cb) in ra.cells.iter().zip(&rb.cells) {
        for (ea, eb) in ca.estimators.iter().zip(&cb.estimators) {
            for k in 0..3 {
                checks += 1;
                let se = ea.pathology.se[k].max(1.0 / a.reps as f64);
                if (ea.pathology.freq[k] - eb.pathology.freq[k]).abs() < 3.0 * se {
                    ok += 1;
                }
            }
        }
    }
    assert!(ok as f64 >= 0.95 * checks as f64, "{ok}/{checks}");
}

#[test]
fn separated_regime_is_regular() {
    let cells = vec![CellSpec::gaussian(0.325, 5.0, 1.0, 1000).unwrap()];
    let mut cfg = StudyConfig::new(cells, 200, vec![EstimatorKind::MleKnownVar], 7);
    cfg.inference = vec![CoverageMethod::MleWald];
    let r = run_study(&cfg).unwrap();
    let e = &r.cells[0].estimators[0];
    assert!(e.bias.abs() < 0.02);
    let cov = r.cells[0].coverage[0].coverage;
    assert!((0.91..=0.99).contains(&cov), "{cov}");
}

#[test]
fn config_validation_and_parsing() {
    let mut cfg = small_study(1);
    cfg.reps = 50;
    assert!(matches!(run_study(&cfg), Err(Error::Config(_))));
    let json = serde_json::to_string(&small_study(1)).unwrap();
    assert_eq!(StudyConfig::from_json(&json).unwrap(), small_study(1));
    let toml = r#"
        reps = 100
        seed = 2
        estimators = ["mom-kappa3"]
        [[cells]]
        n = 60
        [cells.generator]
        kind = "t-mixture"
        df = 5.0
        [cells.generator.spec]
        pi = 0.3
        mu0 = 0.7
        mu1 = -0.3
        sigma0 = 1.0
        sigma1 = 1.0
        variance = "known-equal"
    "#;
    let cfg = StudyConfig::from_toml(toml).unwrap();
    assert!(matches!(cfg.cells[0].generator, Generator::TMixture { .. }));
    assert!(StudyConfig::from_toml("reps = 1").is_err());
}

#[test]
fn rate_table_shapes() {
    let t = rate_experiment(1.0 / 3.0, 1.0, 1.0 / 3.0, &[200, 800], 50, 9).unwrap();
    assert_eq!(t.rows.len(), 2);
    for r in &t.rows {
        assert!(r.quarter[0] <= r.quarter[1] && r.quarter[1] <= r.quarter[2]);
    }
    assert!(rate_experiment(0.2, 1.0, 1.0 / 3.0, &[200], 50, 9).is_err());
}

#[test]
fn separated_indicators_agree() {
    let grid = IndicatorGrid { pis: vec![0.325], deltas: vec![5.0], ns: vec![500], sigma: 1.0 };
    let rows = validate_mom_indicators(&grid, 100, 3).unwrap();
    assert!(rows[0].pileup_agreement > 0.99 && rows[0].sign_agreement > 0.99);
}

#[test]
fn presets_are_listed_and_unknown_ids_fail() {
    let ids = preset_ids();
    for want in ["fig1", "fig4", "figA1", "table2", "rate"] {
        assert!(ids.contains(&want));
    }
    let err = run_preset("fig2", &PresetOptions { seed: 1, reps: None, b: None }).unwrap_err();
    assert!(err.to_string().contains("fig1"));
    let b = run_preset("fig5", &PresetOptions { seed: 1, reps: None, b: None }).unwrap();
    assert!(!b.files.is_empty());
}
