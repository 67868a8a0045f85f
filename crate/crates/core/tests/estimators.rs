use mixpath::estimators::{
    mle_known_var, mle_unknown_equal_var, mle_unknown_unequal_var, mom_covariate_adjusted, mom_from_cumulants, mom_iv,
    mom_kappa3, mom_known_var, MleConfig, Shape,
};
use mixpath::mixture::VarianceKnowledge;
use mixpath::num::StreamRng;
use mixpath::{CumulantEstimates, MixtureSpec, Sample};
use proptest::prelude::*;
use rayon::prelude::*;

fn draw(pi: f64, delta: f64, sigma: f64, n: usize, seed: u64) -> Sample {
    MixtureSpec::zero_mean(pi, delta, sigma).unwrap().sample(n, &mut StreamRng::new(seed, 0)).unwrap()
}

#[test]
fn known_variance_mle_consistent_at_large_n() {
    let y = draw(0.325, 1.0, 1.0, 1_000_000, 1);
    let r = mle_known_var(&y, 0.325, 1.0, &MleConfig::default()).unwrap();
    assert!((r.delta.unwrap() - 1.0).abs() < 0.02, "{:?}", r.delta);
}

#[test]
fn equal_variance_mle_consistent() {
    let y = draw(0.3, 2.0, 1.0, 200_000, 2);
    let r = mle_unknown_equal_var(&y, 0.3, &MleConfig::default()).unwrap();
    assert!((r.delta.unwrap() - 2.0).abs() < 0.04);
    assert!((r.sigma0.unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn unequal_variance_mle_consistent() {
    let spec = MixtureSpec::new(0.3, 1.4, -0.6, 1.0, 2.0, VarianceKnowledge::UnknownUnequal).unwrap();
    let y = spec.sample(200_000, &mut StreamRng::new(3, 0)).unwrap();
    let r = mle_unknown_unequal_var(&y, 0.3, &MleConfig::default()).unwrap();
    assert!((r.delta.unwrap() - 2.0).abs() < 0.06, "{:?}", r.delta);
    assert!((r.sigma0.unwrap() - 1.0).abs() < 0.03);
    assert!((r.sigma1.unwrap() - 2.0).abs() < 0.06);
}

#[test]
fn unequal_variance_nests_equal_variance() {
    let cfg = MleConfig::default();
    for seed in 0..5 {
        let y = draw(0.325, 1.0, 1.0, 300, 10 + seed);
        let eq = mle_unknown_equal_var(&y, 0.325, &cfg).unwrap();
        let uneq = mle_unknown_unequal_var(&y, 0.325, &cfg).unwrap();
        assert!(uneq.loglik.unwrap() >= eq.loglik.unwrap() - 1e-6);
    }
}

#[test]
fn null_data_mostly_pile_up() {
    let cfg = MleConfig::default();
    let piled = (0..40)
        .filter(|&s| {
            let y = MixtureSpec::homoskedastic(0.3, 0.0, 0.0, 1.0).unwrap().sample(200, &mut StreamRng::new(s, 7)).unwrap();
            mle_known_var(&y, 0.3, 1.0, &cfg).unwrap().shape == Shape::Unimodal
        })
        .count();
    assert!(piled >= 15, "{piled}");
}

#[test]
fn global_optimum_beats_dense_grid() {
    let cfg = MleConfig::default();
    (0..100u64).into_par_iter().for_each(|f| {
        let mut rng = StreamRng::new(99, f);
        let n = 20 + (f as usize * 37) % 181;
        let delta = -2.0 + 4.0 * (f as f64 / 99.0);
        let pi = [0.2, 0.325, 0.45, 0.7][f as usize % 4];
        let y = MixtureSpec::zero_mean(pi, delta, 1.0).unwrap().sample(n, &mut rng).unwrap();
        let r = mle_known_var(&y, pi, 1.0, &cfg).unwrap();
        let best = r.loglik.unwrap();
        let k = y.cumulants().unwrap();
        let half = 4.0 * k.k2.sqrt().max(1.0);
        let m = 316;
        for i in 0..m {
            let mu0 = k.k1 - half + 2.0 * half * i as f64 / (m - 1) as f64;
            for j in 0..m {
                let mu1 = k.k1 - half + 2.0 * half * j as f64 / (m - 1) as f64;
                let ll = MixtureSpec::homoskedastic(pi, mu0, mu1, 1.0).unwrap().loglik(&y.y).unwrap();
                assert!(best >= ll - 1e-7, "fixture {f}: {best} < {ll} at ({mu0}, {mu1})");
            }
        }
    });
}

#[test]
fn covariate_estimators() {
    let cfg_y: Vec<f64> = draw(0.3, 1.0, 1.0, 400, 5).y;
    let pooled = Sample::new(cfg_y.clone());
    let mut y = cfg_y.clone();
    y.extend(&cfg_y);
    let x: Vec<u8> = std::iter::repeat_n(0, 400).chain(std::iter::repeat_n(1, 400)).collect();
    let both = Sample::with_covariate(y, x).unwrap();
    let single = mom_known_var(&pooled, 0.3, 1.0).unwrap();
    let adj = mom_covariate_adjusted(&both, 0.3, 0.3, 1.0, 0.37).unwrap();
    match (single.delta, adj.delta) {
        (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
        (None, None) => {}
        other => panic!("{other:?}"),
    }
    assert!(mom_iv(&both, 0.3, 0.3).is_err());

    // Conditional-independence data with pi varying by x.
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for (level, pi) in [(0u8, 0.15), (1u8, 0.45)] {
        let s = MixtureSpec::homoskedastic(pi, 0.9, 0.4, 1.0).unwrap();
        let v = s.sample(400_000, &mut StreamRng::new(8, level as u64)).unwrap();
        xs.extend(std::iter::repeat_n(level, v.len()));
        ys.extend(v.y);
    }
    let iv = mom_iv(&Sample::with_covariate(ys, xs).unwrap(), 0.15, 0.45).unwrap();
    assert!((iv.delta.unwrap() - 0.5).abs() < 0.03);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn location_equivariance(seed in 0u64..1000, c in -20.0f64..20.0, d in 0.3f64..3.0) {
        let y = draw(0.325, d, 1.0, 150, seed);
        let z = y.shifted(c);
        let cfg = MleConfig::default();
        let pairs = [
            (mle_known_var(&y, 0.325, 1.0, &cfg).unwrap(), mle_known_var(&z, 0.325, 1.0, &cfg).unwrap()),
            (mom_known_var(&y, 0.325, 1.0).unwrap(), mom_known_var(&z, 0.325, 1.0).unwrap()),
            (mom_kappa3(&y, 0.325).unwrap(), mom_kappa3(&z, 0.325).unwrap()),
            (mle_unknown_equal_var(&y, 0.325, &cfg).unwrap(), mle_unknown_equal_var(&z, 0.325, &cfg).unwrap()),
        ];
        for (a, b) in pairs {
            match (a.delta, b.delta) {
                (Some(u), Some(v)) => {
                    prop_assert!((u - v).abs() < 1e-4, "{:?}: {} vs {}", a.kind, u, v);
                    prop_assert!((b.mu0 - a.mu0 - c).abs() < 1e-4);
                    prop_assert!((b.mu1 - a.mu1 - c).abs() < 1e-4);
                }
                (None, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn scale_equivariance(seed in 0u64..1000, s in 0.1f64..10.0, d in 0.3f64..3.0) {
        let y = draw(0.325, d, 1.0, 150, seed);
        let z = y.scaled(s);
        let cfg = MleConfig::default();
        let a = mle_known_var(&y, 0.325, 1.0, &cfg).unwrap();
        let b = mle_known_var(&z, 0.325, s, &cfg).unwrap();
        prop_assert!((b.delta.unwrap() - s * a.delta.unwrap()).abs() < 1e-4 * s.max(1.0));
        let a = mom_known_var(&y, 0.325, 1.0).unwrap();
        let b = mom_known_var(&z, 0.325, s).unwrap();
        match (a.delta, b.delta) {
            (Some(u), Some(v)) => prop_assert!((v - s * u).abs() < 1e-9 * s.max(1.0)),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn moment_estimator_inverts_population_cumulants(
        pi in 0.05f64..0.95, d in prop_oneof![-5.0f64..-0.01, 0.01f64..5.0], sigma in 0.2f64..3.0,
    ) {
        prop_assume!((pi - 0.5).abs() > 0.01);
        let spec = MixtureSpec::zero_mean(pi, d, sigma).unwrap();
        let [k1, k2, k3] = spec.population_cumulants().unwrap();
        let k = CumulantEstimates { k1, k2, k3, n: 100 };
        let r = mom_from_cumulants(&k, pi, sigma).unwrap();
        prop_assert!((r.delta.unwrap() - d).abs() < 1e-8 * (1.0 + d.abs()) / (d.abs() / sigma).min(1.0));
    }

    #[test]
    fn kappa3_estimator_is_odd(seed in 0u64..1000) {
        let y = draw(0.325, 1.0, 1.0, 100, seed);
        let m = y.cumulants().unwrap().k1;
        let flipped = Sample::new(y.y.iter().map(|v| 2.0 * m - v).collect());
        let a = mom_kappa3(&y, 0.325).unwrap().delta.unwrap();
        let b = mom_kappa3(&flipped, 0.325).unwrap().delta.unwrap();
        prop_assert!((a + b).abs() < 1e-9);
    }
}
