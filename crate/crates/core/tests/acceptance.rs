//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line and
//! asserts it; tolerances are pinned next to each check.

use mixpath::diagnostics::{conditional_bias_mom, forecast_analytic, forecast_monte_carlo, BiasEstimator};
use mixpath::estimators::EstimatorKind;
use mixpath::inference::ConfidenceSet;
use mixpath::mixture::MixtureSpec;
use mixpath::num::{QuadratureConfig, StreamRng};
use mixpath::prinstrat::{analyze, jobs2_synthetic, PSConfig};
use mixpath::simlab::{
    conditional_mle_magnitude, covariate_joint_table, misspecification_study, rate_experiment, run_study,
    validate_mom_indicators, CellSpec, CoverageMethod, IndicatorGrid, StudyConfig,
};
use mixpath::estimators::Interval;

const SEED: u64 = 20_251_015;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} {name}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} {name} failed: {detail}");
}

fn hull(set: &[Interval]) -> Option<Interval> {
    Some(Interval::new(set.first()?.lo, set.last()?.hi))
}

fn near(a: Option<Interval>, lo: f64, hi: f64, tol: f64) -> bool {
    a.is_some_and(|a| (a.lo - lo).abs() <= tol && (a.hi - hi).abs() <= tol)
}

fn show(set: &[Interval]) -> String {
    set.iter().map(|i| format!("[{:.3}, {:.3}]", i.lo, i.hi)).collect::<Vec<_>>().join(" u ")
}

#[test]
fn c01_pathology_tripoint() {
    const BAND: f64 = 0.08;
    const MC_TOL: f64 = 0.05;
    let a = forecast_analytic(0.5, 0.325, 1.0, 200).unwrap();
    let spec = MixtureSpec::zero_mean(0.325, 0.5, 1.0).unwrap();
    let m = forecast_monte_carlo(&spec, 200, 1000, &StreamRng::new(SEED, 1)).unwrap();
    let av = [a.p_correct, a.p_pileup, a.p_signerror];
    let mv = [m.p_correct, m.p_pileup, m.p_signerror];
    let pass = av.iter().all(|p| (p - 1.0 / 3.0).abs() <= BAND) && av.iter().zip(&mv).all(|(x, y)| (x - y).abs() <= MC_TOL);
    report(1, "pathology tripoint", pass, format!("analytic {av:.3?}, monte carlo {mv:.3?}"));
}

#[test]
fn c02_correct_at_n2000() {
    const TOL: f64 = 0.05;
    let a = forecast_analytic(0.75, 0.325, 1.0, 2000).unwrap();
    let spec = MixtureSpec::zero_mean(0.325, 0.75, 1.0).unwrap();
    let m = forecast_monte_carlo(&spec, 2000, 1000, &StreamRng::new(SEED, 2)).unwrap();
    let pass = (a.p_correct - 0.70).abs() <= TOL && (m.p_correct - 0.70).abs() <= TOL;
    report(2, "p-correct at N=2000", pass, format!("analytic {:.3}, monte carlo {:.3}", a.p_correct, m.p_correct));
}

#[test]
fn c03_moment_indicator_agreement() {
    const MIN: f64 = 0.95;
    let grid = IndicatorGrid { pis: vec![0.2, 0.325, 0.45], deltas: vec![0.25, 0.5, 0.75, 1.0], ns: vec![100, 500, 2000], sigma: 1.0 };
    let rows = validate_mom_indicators(&grid, 500, SEED).unwrap();
    let avg = rows.iter().map(|r| r.pileup_agreement).sum::<f64>() / rows.len() as f64;
    let worst = rows.iter().map(|r| r.pileup_agreement).fold(1.0, f64::min);
    report(3, "pile-up indicator agreement", avg > MIN, format!("mean {avg:.4} over {} cells, worst cell {worst:.4}", rows.len()));
}

#[test]
fn c04_conditional_bias() {
    const TOL: f64 = 0.05;
    let (pi, d) = (0.325, 0.25);
    let ns = [100, 500, 2000, 5000];
    let curve = conditional_bias_mom(d, pi, 1.0, &ns, BiasEstimator::MomKnownVar, &QuadratureConfig::default()).unwrap();
    let spec = MixtureSpec::zero_mean(pi, d, 1.0).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let mc = conditional_mle_magnitude(&spec, n, 2000, SEED).unwrap().mean_abs.unwrap();
        let an = curve.conditional_mean[i];
        pass &= (an - mc).abs() <= TOL;
        if n <= 2000 {
            pass &= an > d && mc > d;
        }
        detail.push(format!("N={n}: integral {an:.3} mc {mc:.3}"));
    }
    report(4, "conditional bias", pass, detail.join("; "));
}

#[test]
fn c05_inversion_coverage() {
    const LO: f64 = 0.92;
    const HI: f64 = 0.98;
    let cells = StudyConfig::grid(&[0.325], &[0.25, 0.75], &[100, 1000], 1.0).unwrap();
    let mut cfg = StudyConfig::new(cells, 500, vec![EstimatorKind::MleKnownVar], SEED);
    cfg.inference = vec![CoverageMethod::MleWald, CoverageMethod::WaldInversion, CoverageMethod::GridBootstrap];
    cfg.b = 499;
    let r = run_study(&cfg).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for c in &r.cells {
        let cov = |m: CoverageMethod| c.coverage.iter().find(|s| s.method == m).unwrap().coverage;
        let (mw, wi, gb) = (cov(CoverageMethod::MleWald), cov(CoverageMethod::WaldInversion), cov(CoverageMethod::GridBootstrap));
        pass &= (LO..=HI).contains(&wi) && (LO..=HI).contains(&gb);
        if c.working.truth_delta == 0.25 && c.n == 1000 {
            pass &= mw < wi && mw < gb;
        }
        detail.push(format!("d={} N={}: wald-inv {wi:.3} gridboot {gb:.3} mle-wald {mw:.3}", c.working.truth_delta, c.n));
    }
    report(5, "test-inversion coverage", pass, detail.join("; "));
}

#[test]
fn c06_jobs2_pipeline() {
    let data = jobs2_synthetic();
    let rep = analyze(&data, &PSConfig::default()).unwrap();
    let est = &rep.estimates;
    let c = est.control.as_ref().unwrap();
    let itt = est.itt.as_ref().unwrap();
    let f = c.forecast.unwrap();
    let gb: &ConfidenceSet = c.delta_gridboot.as_ref().unwrap();
    let checks = [
        ("delta-hat", (c.mle.delta_or_zero()).abs() <= 0.02),
        ("wald", near(c.mle.wald_ci, -0.9, 0.9, 0.1)),
        ("gridboot", near(hull(&gb.accepted), -1.27, 1.27, 0.1)),
        ("itt-c", near(hull(&itt.itt_c), -1.21, 0.61, 0.1)),
        ("itt-n", near(hull(&itt.itt_n), -1.14, 0.95, 0.1)),
        ("pile-up", (f.p_pileup - 0.65).abs() <= 0.05),
        ("sign", (f.p_signerror - 0.12).abs() <= 0.05),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "delta {:.3}, wald {:?}, gridboot {}, itt-c {}, itt-n {}, forecast {:.3}/{:.3}, failed {failed:?}",
        c.mle.delta_or_zero(),
        c.mle.wald_ci.map(|i| (i.lo, i.hi)),
        show(&gb.accepted),
        show(&itt.itt_c),
        show(&itt.itt_n),
        f.p_pileup,
        f.p_signerror,
    );
    report(6, "JOBS II synthetic pipeline", failed.is_empty(), detail);
}

#[test]
fn c07_covariate_joint_table() {
    const TOL: f64 = 0.04;
    const TARGET: [[f64; 3]; 3] = [[0.31, 0.18, 0.09], [0.0, 0.0, 0.0], [0.23, 0.13, 0.06]];
    let t = covariate_joint_table([500, 500], [0.45, 0.15], [1.0, 0.5], 1.0, 10_000, SEED).unwrap();
    let worst = (0..9).map(|k| (t.freq[k / 3][k % 3] - TARGET[k / 3][k % 3]).abs()).fold(0.0, f64::max);
    let pct = t.freq.map(|r| r.map(|v| (v * 1000.0).round() / 10.0));
    report(7, "covariate joint pathology table", worst <= TOL && t.failed == 0, format!("{pct:?}%, worst gap {worst:.3}"));
}

#[test]
fn c08_rate() {
    const SPREAD: f64 = 3.0;
    const FLOOR: f64 = 0.01;
    const STABLE: f64 = 1.5;
    let ns = [500, 2000, 8000, 32000];
    let pi = 1.0 / 3.0;
    let shrink = rate_experiment(1.0 / 3.0, 1.0, pi, &ns, 500, SEED).unwrap();
    let fixed = rate_experiment(0.0, 1.0, pi, &ns, 500, SEED).unwrap();
    let ratio = |v: Vec<f64>| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let med: Vec<f64> = shrink.rows.iter().map(|r| r.quarter[1]).collect();
    let q10 = shrink.rows.iter().map(|r| r.quarter[0]).fold(f64::INFINITY, f64::min);
    let half: Vec<f64> = fixed.rows.iter().map(|r| r.half[1]).collect();
    let (rs, rf) = (ratio(med.clone()), ratio(half.clone()));
    let pass = rs <= SPREAD && q10 > FLOOR && rf <= STABLE;
    report(8, "rate", pass, format!("n^1/4 medians {med:.3?} (ratio {rs:.2}, min q10 {q10:.3}); fixed n^1/2 medians {half:.3?} (ratio {rf:.2})"));
}

#[test]
fn c09_unknown_variance_shape() {
    const CENTER_MAX: f64 = 0.02;
    const CENTER_MIN: f64 = 0.10;
    const BAND: f64 = 0.05;
    let cells = vec![CellSpec::gaussian(0.325, 0.25, 1.0, 5000).unwrap()];
    let mut cfg = StudyConfig::new(cells, 500, vec![EstimatorKind::MleUnknownEqualVar, EstimatorKind::MleUnknownUnequalVar], SEED);
    cfg.keep_replicates = true;
    let r = run_study(&cfg).unwrap();
    let recs = r.replicates.unwrap();
    let draws = |j: usize| -> Vec<f64> {
        recs.iter().filter(|x| x.pathology[j].is_some()).map(|x| x.delta[j].unwrap_or(0.0).abs()).collect()
    };
    let (eq, uneq) = (draws(0), draws(1));
    let center = |v: &[f64]| v.iter().filter(|&&d| d < BAND).count() as f64 / v.len() as f64;
    // Modal 0.1-wide bin of |estimate| away from the center.
    let mut bins = [0usize; 30];
    for &d in eq.iter().filter(|&&d| d >= BAND && d < 3.0) {
        bins[(d / 0.1) as usize] += 1;
    }
    let k = (0..30).max_by_key(|&k| bins[k]).unwrap();
    let mode = 0.1 * k as f64 + 0.05;
    let (ce, cu) = (center(&eq), center(&uneq));
    let pass = ce < CENTER_MAX && (0.5..=1.0).contains(&mode) && cu >= CENTER_MIN;
    report(9, "unknown-variance shape", pass, format!("equal center mass {ce:.3}, outer mode {mode:.2}; unequal center mass {cu:.3}"));
}

#[test]
fn c10_cumulant_law() {
    const DIAG: f64 = 0.05;
    const OFF: f64 = 0.10;
    let spec = MixtureSpec::zero_mean(0.325, 0.25, 1.0).unwrap();
    let n = 200;
    let reps = 200_000;
    let law = spec.cumulant_law(n).unwrap();
    let ks: Vec<[f64; 3]> = (0..reps)
        .map(|r| {
            let k = spec.simulate_cumulants(n, &mut StreamRng::new(SEED, r as u64)).unwrap();
            [k.k1, k.k2, k.k3]
        })
        .collect();
    let mean: [f64; 3] = std::array::from_fn(|i| ks.iter().map(|k| k[i]).sum::<f64>() / reps as f64);
    let mut pass = true;
    let mut detail = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            let c = ks.iter().map(|k| (k[i] - mean[i]) * (k[j] - mean[j])).sum::<f64>() / (reps - 1) as f64;
            let t = law.covariance[i][j];
            let rel = (c - t).abs() / t.abs();
            pass &= rel <= if i == j { DIAG } else { OFF };
            detail.push(format!("({},{}) rel {rel:.3}", i + 1, j + 1));
        }
    }
    report(10, "cumulant law", pass, detail.join(", "));
}

#[test]
fn c11_misspecification() {
    const HEAVY_MAX: f64 = 0.75;
    const LIGHT_MIN: f64 = 0.90;
    let spec = MixtureSpec::zero_mean(0.325, 1.0, 1.0).unwrap();
    let rows = misspecification_study(&[Some(50.0), Some(3.0)], &spec, 1000, 1000, 0.05, 499, SEED).unwrap();
    let (light, heavy) = (rows[0].coverage, rows[1].coverage);
    report(11, "misspecification", light >= LIGHT_MIN && heavy <= HEAVY_MAX, format!("df=50 coverage {light:.3}, df=3 coverage {heavy:.3}"));
}
