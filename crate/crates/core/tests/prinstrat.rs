use mixpath::estimators::Interval;
use mixpath::num::StreamRng;
use mixpath::prinstrat::{
    analyze, fit_treatment_arm, infer_control_arm, interval_difference, itt_confidence_sets, jobs2_synthetic, set_difference,
    union, ControlMethod, PSConfig, PSDataset,
};
use mixpath::inference::GridSpec;
use mixpath::Error;
use proptest::prelude::*;
use rand::Rng;
use rayon::prelude::*;

fn interval() -> impl Strategy<Value = Interval> {
    (-10.0f64..10.0, 0.0f64..5.0).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

/// Simulated trial with one-sided noncompliance; strata means given as
/// `(mu_c0, mu_n0, mu_c1, mu_n1)`.
fn trial(pi: f64, means: [f64; 4], n: [usize; 2], seed: u64) -> PSDataset {
    let mut rng = StreamRng::new(seed, 0);
    let (mut z, mut d, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for (arm, &size) in n.iter().enumerate() {
        for _ in 0..size {
            let complier = rng.random::<f64>() < pi;
            let mean = match (arm, complier) {
                (0, true) => means[0],
                (0, false) => means[1],
                (_, true) => means[2],
                (_, false) => means[3],
            };
            let e: f64 = rng.sample(rand_distr::StandardNormal);
            z.push(arm as u8);
            d.push(u8::from(arm == 1 && complier));
            y.push(mean + e);
        }
    }
    PSDataset::new(z, d, y).unwrap()
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let data = jobs2_synthetic();
    let mut a = Vec::new();
    data.write_csv(&mut a).unwrap();
    let back = PSDataset::read_csv(a.as_slice()).unwrap();
    assert_eq!(back, data);
    let mut b = Vec::new();
    back.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    let shuffled = PSDataset::read_csv("y,z,d\n0.5,1,1\n0.25,1,0\n-1,0,0\n".as_bytes()).unwrap();
    assert_eq!(shuffled.z, vec![1, 1, 0]);
    assert_eq!(shuffled.d, vec![1, 0, 0]);
}

#[test]
fn raw_scale_sets_are_rescaled_standardized_sets() {
    let cfg = PSConfig { b: 199, forecast_b: 200, ..PSConfig::default() };
    let r = analyze(&jobs2_synthetic(), &cfg).unwrap();
    let st = r.estimates.standardization;
    let itt = r.estimates.itt.as_ref().unwrap();
    assert_eq!(r.raw_itt_c, st.effects_to_raw(&itt.itt_c));
    assert_eq!(r.raw_itt_n, st.effects_to_raw(&itt.itt_n));
    for (raw, s) in r.raw_itt_c.iter().zip(&itt.itt_c) {
        assert!((raw.lo / st.scale - s.lo).abs() < 1e-12 && (raw.hi / st.scale - s.hi).abs() < 1e-12);
    }
    let y0 = 2.37;
    assert!((st.level_to_raw(st.apply(y0)) - y0).abs() < 1e-12);
}

#[test]
fn half_weight_is_rejected_with_guidance() {
    let z = vec![1, 1, 1, 1, 0, 0, 0];
    let d = vec![1, 1, 0, 0, 0, 0, 0];
    let data = PSDataset::new(z, d, vec![0.1, 0.5, -0.2, 0.3, 0.0, 1.0, -1.0]).unwrap();
    let est = fit_treatment_arm(&data).unwrap();
    let err = infer_control_arm(&data, &est, ControlMethod::Mle, 0.05, &PSConfig::default()).unwrap_err();
    assert!(matches!(err, Error::SignUnidentifiable(_)));
    assert!(err.to_string().contains("joint"));
}

#[test]
fn separation_recovered_at_large_n() {
    let data = trial(0.35, [1.6, -0.4, 1.9, -0.4], [20_000, 20_000], 3);
    let est = fit_treatment_arm(&data).unwrap();
    let out = infer_control_arm(&data, &est, ControlMethod::Mle, 0.05, &PSConfig::default()).unwrap();
    let d = out.control.unwrap().mle.delta.unwrap();
    assert!((d * est.standardization.scale - 2.0).abs() < 0.15, "{d}");
}

#[test]
fn itt_n_covers_zero_under_exclusion() {
    let cfg = PSConfig { mean_grid: GridSpec::new(-2.5, 2.5, 101).unwrap(), ..PSConfig::default() };
    let reps = 200u64;
    let covered = (0..reps)
        .into_par_iter()
        .filter(|&r| {
            let data = trial(0.4, [0.8, -0.2, 1.1, -0.2], [250, 250], 100 + r);
            let est = fit_treatment_arm(&data).unwrap();
            let est = infer_control_arm(&data, &est, ControlMethod::WaldInvert2d, 0.025, &cfg).unwrap();
            let sets = itt_confidence_sets(&est, 0.05).unwrap();
            sets.itt_n.iter().any(|i| i.contains(0.0))
        })
        .count();
    let rate = covered as f64 / reps as f64;
    assert!(rate >= 0.9, "coverage {rate}");
}

#[test]
fn point_control_set_shifts_treatment_interval() {
    let t = Interval::new(-0.35, 0.03);
    let c = 0.4;
    assert_eq!(set_difference(&[t], &[Interval::new(c, c)]), vec![Interval::new(t.lo - c, t.hi - c)]);
}

proptest! {
    #[test]
    fn difference_is_hull_of_pointwise_differences(a in interval(), b in interval(), s in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 50)) {
        let d = interval_difference(a, b);
        for (u, v) in s {
            let x = a.lo + u * (a.hi - a.lo) - (b.lo + v * (b.hi - b.lo));
            prop_assert!(x >= d.lo - 1e-12 && x <= d.hi + 1e-12);
        }
        prop_assert!((d.lo - (a.lo - b.hi)).abs() < 1e-12);
        prop_assert!((d.hi - (a.hi - b.lo)).abs() < 1e-12);
    }

    #[test]
    fn union_is_sorted_disjoint_cover(set in prop::collection::vec(interval(), 0..8), probe in -12.0f64..16.0) {
        let u = union(set.clone());
        for w in u.windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
        prop_assert_eq!(set.iter().any(|i| i.contains(probe)), u.iter().any(|i| i.contains(probe)));
    }

    #[test]
    fn difference_is_monotone_in_component_sets(a in interval(), b in interval(), ea in 0.0f64..1.0, eb in 0.0f64..1.0, probe in -20.0f64..20.0) {
        let wide_a = Interval::new(a.lo - ea, a.hi + ea);
        let wide_b = Interval::new(b.lo - eb, b.hi + eb);
        let narrow = set_difference(&[a], &[b]);
        let wide = set_difference(&[wide_a], &[wide_b]);
        if narrow.iter().any(|i| i.contains(probe)) {
            prop_assert!(wide.iter().any(|i| i.contains(probe)));
        }
    }
}

