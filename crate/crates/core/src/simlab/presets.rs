//! Named study presets with pinned design parameters. Each preset returns
//! plot-ready CSV files and a JSON summary.

use super::{
    bootstrap_cumulants, conditional_mle_magnitude, covariate_joint_table, misspecification_study, rate_experiment,
    run_study, validate_mom_indicators, CellSpec, CoverageMethod, IndicatorGrid, StudyConfig, StudyResult,
};
use crate::diagnostics::{conditional_bias_mom, forecast_analytic, write_forecast_csv, BiasEstimator};
use crate::error::{Error, Result};
use crate::estimators::{profile_loglik, EstimatorKind, MleConfig};
use crate::inference::{wald_invert_2d, Grid2d, GridSpec};
use crate::mixture::MixtureSpec;
use crate::num::{QuadratureConfig, StreamRng};
use crate::prinstrat::{fit_treatment_arm, jobs2_synthetic};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;

/// Sample sizes of the main simulation grid. Both 400 and 500 appear.
pub const N_GRID: [usize; 8] = [50, 100, 200, 400, 500, 1000, 2000, 5000];
pub const PI_GRID: [f64; 3] = [0.2, 0.325, 0.45];
pub const DELTA_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

pub const PRESETS: [(&str, &str); 15] = [
    ("fig1", "MLE draws at N = 132, pi = 0.55, delta in {0.5, 1.0}"),
    ("fig3", "profile log-likelihoods, one unimodal and one bimodal example"),
    ("fig4", "MLE bias, Wald coverage and pathologies, pi = 0.325, delta in {0.25, 0.75}"),
    ("fig5", "analytic pathology forecasts, pi = 0.325"),
    ("fig6", "conditional means of the moment and ML estimators, delta = 0.25"),
    ("fig7", "Wald p-values over (mu0, mu1), N = 1000, mu0 = 1/8, mu1 = -1/8"),
    ("fig8", "MLE bias and coverage with conditional lines, N = 132, pi = 0.55"),
    ("fig9", "bootstrap k-statistics of the synthetic JOBS II control arm"),
    ("fig10", "unknown-variance MLE draws, delta = 0.25, N = 5000"),
    ("fig11", "unknown-variance MLE means and the kappa3 moment curve"),
    ("figA1", "coverage of inversion sets against MLE Wald intervals"),
    ("table2", "joint pathology table with a binary covariate"),
    ("mom-indicators", "agreement of moment indicators with MLE pathologies"),
    ("misspec", "grid-bootstrap coverage under t components"),
    ("rate", "scaled MLE error with shrinking and fixed separation"),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetOptions {
    pub seed: u64,
    /// Overrides the preset's replicate count.
    pub reps: Option<usize>,
    /// Overrides the grid-bootstrap replicate count.
    pub b: Option<usize>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self { seed: 1, reps: None, b: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateBundle {
    pub id: String,
    pub description: String,
    /// Resolved parameters, enough to rerun the preset.
    pub config: Value,
    pub files: Vec<OutputFile>,
    pub summary: Value,
}

pub fn preset_ids() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

fn file(name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<OutputFile> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(OutputFile { name: name.into(), contents: String::from_utf8(buf).expect("CSV writers emit UTF-8") })
}

fn study_files(r: &StudyResult) -> Result<Vec<OutputFile>> {
    let mut out = vec![file("estimators.csv", |w| r.write_estimator_csv(w))?];
    if !r.config.inference.is_empty() {
        out.push(file("coverage.csv", |w| r.write_coverage_csv(w))?);
    }
    if r.replicates.is_some() {
        out.push(file("replicates.csv", |w| r.write_replicates_csv(w))?);
    }
    Ok(out)
}

fn study_summary(r: &StudyResult) -> Result<Value> {
    Ok(serde_json::to_value(&r.cells)?)
}

/// Histogram of kept estimates per cell and estimator.
fn histogram(r: &StudyResult, lo: f64, hi: f64, bins: usize) -> Result<OutputFile> {
    let recs = r.replicates.as_ref().ok_or_else(|| Error::Config("replicates were not kept".into()))?;
    let width = (hi - lo) / bins as f64;
    let mut s = String::from("cell,delta_true,estimator,bin_lo,bin_hi,count\n");
    for (c, cell) in r.cells.iter().enumerate() {
        for (j, e) in r.config.estimators.iter().enumerate() {
            let mut counts = vec![0usize; bins];
            for rec in recs.iter().filter(|x| x.cell == c) {
                if let Some(d) = rec.delta[j].or(rec.pathology[j].map(|_| 0.0)) {
                    let k = ((d - lo) / width).floor();
                    if k >= 0.0 && (k as usize) < bins {
                        counts[k as usize] += 1;
                    }
                }
            }
            for (k, n) in counts.iter().enumerate() {
                let a = lo + width * k as f64;
                writeln!(s, "{c},{},{},{a},{},{n}", cell.working.truth_delta, super::kebab(e), a + width).expect("string write");
            }
        }
    }
    Ok(OutputFile { name: "histogram.csv".into(), contents: s })
}

fn study(cells: Vec<CellSpec>, reps: usize, est: Vec<EstimatorKind>, inf: Vec<CoverageMethod>, o: &PresetOptions, keep: bool) -> StudyConfig {
    let mut cfg = StudyConfig::new(cells, o.reps.unwrap_or(reps), est, o.seed);
    cfg.inference = inf;
    cfg.keep_replicates = keep;
    if let Some(b) = o.b {
        cfg.b = b;
    }
    cfg
}

fn run_study_preset(cfg: StudyConfig, hist: Option<(f64, f64, usize)>) -> Result<(Value, Vec<OutputFile>, Value)> {
    let r = run_study(&cfg)?;
    let mut files = study_files(&r)?;
    if let Some((lo, hi, bins)) = hist {
        files.push(histogram(&r, lo, hi, bins)?);
    }
    Ok((serde_json::to_value(&cfg)?, files, study_summary(&r)?))
}

/// Runs the named preset.
pub fn run_preset(id: &str, o: &PresetOptions) -> Result<ReplicateBundle> {
    let description = PRESETS
        .iter()
        .find(|p| p.0 == id)
        .map(|p| p.1.to_string())
        .ok_or_else(|| Error::Config(format!("unknown preset {id:?}; available: {}", preset_ids().join(", "))))?;
    use CoverageMethod::*;
    use EstimatorKind::*;
    let (config, files, summary) = match id {
        "fig1" => run_study_preset(
            study(StudyConfig::grid(&[0.55], &[0.5, 1.0], &[132], 1.0)?, 1000, vec![MleKnownVar], vec![], o, true),
            Some((-3.0, 3.0, 60)),
        )?,
        "fig3" => {
            let (pi, n) = (0.325, 500);
            let grid = GridSpec::new(-3.0, 3.0, 301)?.values();
            let mut s = String::from("delta_true,delta,loglik\n");
            let mut shapes = Vec::new();
            for (k, &d) in [0.2, 1.0].iter().enumerate() {
                let y = MixtureSpec::zero_mean(pi, d, 1.0)?.sample(n, &mut StreamRng::keyed(o.seed, &[k as u64]))?;
                let ll = profile_loglik(&y, pi, Some(1.0), &grid, &MleConfig::default())?;
                for (x, v) in grid.iter().zip(&ll) {
                    writeln!(s, "{d},{x},{v}").expect("string write");
                }
                let modes = (1..ll.len() - 1).filter(|&i| ll[i] > ll[i - 1] && ll[i] >= ll[i + 1]).count();
                shapes.push(json!({"delta_true": d, "local_maxima": modes}));
            }
            (
                json!({"pi": pi, "n": n, "sigma": 1.0, "deltas": [0.2, 1.0], "grid": [-3.0, 3.0, 301], "seed": o.seed}),
                vec![OutputFile { name: "profiles.csv".into(), contents: s }],
                Value::Array(shapes),
            )
        }
        "fig4" => run_study_preset(
            study(StudyConfig::grid(&[0.325], &[0.25, 0.75], &N_GRID, 1.0)?, 1000, vec![MleKnownVar], vec![MleWald], o, false),
            None,
        )?,
        "fig5" => {
            let pi = 0.325;
            let ns: Vec<usize> = (0..=40).map(|i| (50.0 * 100f64.powf(i as f64 / 40.0)).round() as usize).collect();
            let deltas: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).collect();
            let a = ns.iter().map(|&n| forecast_analytic(0.25, pi, 1.0, n)).collect::<Result<Vec<_>>>()?;
            let b = deltas.iter().map(|&d| forecast_analytic(d, pi, 1.0, 200)).collect::<Result<Vec<_>>>()?;
            (
                json!({"pi": pi, "sigma": 1.0, "vary_n": {"delta": 0.25, "n": ns}, "vary_delta": {"n": 200, "delta": deltas}}),
                vec![
                    file("forecast_vary_n.csv", |w| write_forecast_csv(&a, w))?,
                    file("forecast_vary_delta.csv", |w| write_forecast_csv(&b, w))?,
                ],
                json!({"vary_n": a, "vary_delta": b}),
            )
        }
        "fig6" => {
            let (pi, d) = (0.325, 0.25);
            let ns = [100, 200, 500, 1000, 2000, 5000];
            let reps = o.reps.unwrap_or(1000);
            let curve = conditional_bias_mom(d, pi, 1.0, &ns, BiasEstimator::MomKnownVar, &QuadratureConfig::default())?;
            let spec = MixtureSpec::zero_mean(pi, d, 1.0)?;
            let mc = ns.iter().map(|&n| conditional_mle_magnitude(&spec, n, reps, o.seed)).collect::<Result<Vec<_>>>()?;
            let mut s = String::from("n,mom_mean,region_probability,mle_mean,mle_se,mle_count\n");
            for (i, m) in mc.iter().enumerate() {
                let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                writeln!(s, "{},{},{},{},{},{}", ns[i], curve.conditional_mean[i], curve.region_probability[i], f(m.mean_abs), f(m.se), m.count)
                    .expect("string write");
            }
            (
                json!({"pi": pi, "delta": d, "sigma": 1.0, "n": ns, "reps": reps, "seed": o.seed}),
                vec![OutputFile { name: "conditional_bias.csv".into(), contents: s }],
                json!({"mom": curve, "mle": mc}),
            )
        }
        "fig7" => {
            let spec = MixtureSpec::homoskedastic(0.325, 0.125, -0.125, 1.0)?;
            let mut files = Vec::new();
            let mut sum = Vec::new();
            for k in 0..3u64 {
                let y = spec.sample(1000, &mut StreamRng::keyed(o.seed, &[k]))?;
                let kk = y.cumulants()?;
                let axis = GridSpec::default_mean_axis(&kk, 1.0);
                let set = wald_invert_2d(&y, 0.325, 1.0, &Grid2d { mu0: axis, mu1: axis }, 0.05)?;
                sum.push(json!({"dataset": k + 1, "mu0_projection": set.mu0_projection, "mu1_projection": set.mu1_projection}));
                files.push(file(&format!("pvalues_{}.csv", k + 1), |w| set.write_csv(w))?);
            }
            (json!({"spec": spec, "n": 1000, "alpha": 0.05, "seed": o.seed}), files, Value::Array(sum))
        }
        "fig8" => {
            let deltas: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
            run_study_preset(
                study(StudyConfig::grid(&[0.55], &deltas, &[132], 1.0)?, 1000, vec![MleKnownVar], vec![MleWald], o, false),
                None,
            )?
        }
        "fig9" => {
            let data = jobs2_synthetic();
            let est = fit_treatment_arm(&data)?;
            let y = est.control_sample(&data);
            let b = o.b.unwrap_or(2000);
            let ks = bootstrap_cumulants(&y, b, &StreamRng::keyed(o.seed, &[9]))?;
            let mut s = String::from("k2,k3\n");
            for k in &ks {
                writeln!(s, "{},{}", k.k2, k.k3).expect("string write");
            }
            let mut o_s = String::from("y\n");
            for v in &y.y {
                writeln!(o_s, "{v}").expect("string write");
            }
            let p2 = ks.iter().filter(|k| k.k2 < 1.0).count() as f64 / b as f64;
            let p3 = ks.iter().filter(|k| k.k3 < 0.0).count() as f64 / b as f64;
            (
                json!({"data": "bundled synthetic JOBS II", "b": b, "seed": o.seed}),
                vec![
                    OutputFile { name: "bootstrap_cumulants.csv".into(), contents: s },
                    OutputFile { name: "control_outcomes.csv".into(), contents: o_s },
                ],
                json!({"observed": y.cumulants()?, "p_k2_below_1": p2, "p_k3_negative": p3}),
            )
        }
        "fig10" => run_study_preset(
            study(
                StudyConfig::grid(&[0.325], &[0.25], &[5000], 1.0)?,
                1000,
                vec![MleUnknownEqualVar, MleUnknownUnequalVar],
                vec![],
                o,
                true,
            ),
            Some((-2.0, 2.0, 80)),
        )?,
        "fig11" => {
            let ns = [100, 200, 500, 1000, 2000, 5000];
            let curve = conditional_bias_mom(0.25, 0.325, 1.0, &ns, BiasEstimator::MomKappa3, &QuadratureConfig::default())?;
            let (cfg, mut files, summary) = run_study_preset(
                study(StudyConfig::grid(&[0.325], &[0.25], &ns, 1.0)?, 1000, vec![MleUnknownEqualVar], vec![], o, false),
                None,
            )?;
            let mut s = String::from("n,mom_kappa3_mean,region_probability\n");
            for (i, n) in ns.iter().enumerate() {
                writeln!(s, "{n},{},{}", curve.conditional_mean[i], curve.region_probability[i]).expect("string write");
            }
            files.push(OutputFile { name: "mom_kappa3.csv".into(), contents: s });
            (cfg, files, json!({"mle": summary, "mom_kappa3": curve}))
        }
        "figA1" => run_study_preset(
            study(
                StudyConfig::grid(&[0.325], &DELTA_GRID, &N_GRID, 1.0)?,
                1000,
                vec![MleKnownVar],
                vec![MleWald, WaldInversion, GridBootstrap],
                o,
                false,
            ),
            None,
        )?,
        "table2" => {
            let reps = o.reps.unwrap_or(10_000);
            let t = covariate_joint_table([500, 500], [0.45, 0.15], [1.0, 0.5], 1.0, reps, o.seed)?;
            let names = ["correct", "pile-up", "sign-error"];
            let mut s = String::from("x0,x1,count,freq\n");
            for i in 0..3 {
                for j in 0..3 {
                    writeln!(s, "{},{},{},{}", names[i], names[j], t.counts[i][j], t.freq[i][j]).expect("string write");
                }
            }
            (
                json!({"n": [500, 500], "pi": [0.45, 0.15], "delta": [1.0, 0.5], "sigma": 1.0, "reps": reps, "seed": o.seed}),
                vec![OutputFile { name: "joint_pathology.csv".into(), contents: s }],
                serde_json::to_value(&t)?,
            )
        }
        "mom-indicators" => {
            let grid = IndicatorGrid { pis: PI_GRID.to_vec(), deltas: DELTA_GRID.to_vec(), ns: vec![100, 500, 2000], sigma: 1.0 };
            let reps = o.reps.unwrap_or(500);
            let rows = validate_mom_indicators(&grid, reps, o.seed)?;
            let mut s = String::from("pi,delta,n,reps,pileup_agreement,sign_agreement,mle_pileup,mle_signerror\n");
            for r in &rows {
                writeln!(s, "{},{},{},{},{},{},{},{}", r.pi, r.delta, r.n, r.reps, r.pileup_agreement, r.sign_agreement, r.mle_pileup, r.mle_signerror)
                    .expect("string write");
            }
            (
                json!({"grid": grid, "reps": reps, "seed": o.seed}),
                vec![OutputFile { name: "indicators.csv".into(), contents: s }],
                serde_json::to_value(&rows)?,
            )
        }
        "misspec" => {
            let dfs = [Some(3.0), Some(4.0), Some(5.0), Some(10.0), Some(20.0), Some(50.0), None];
            let spec = MixtureSpec::zero_mean(0.325, 1.0, 1.0)?;
            let (n, reps, b) = (1000, o.reps.unwrap_or(1000), o.b.unwrap_or(499));
            let rows = misspecification_study(&dfs, &spec, n, reps, 0.05, b, o.seed)?;
            let mut s = String::from("df,ok,coverage,se\n");
            for r in &rows {
                let df = r.df.map(|d| d.to_string()).unwrap_or_else(|| "inf".into());
                writeln!(s, "{df},{},{},{}", r.ok, r.coverage, r.se).expect("string write");
            }
            (
                json!({"spec": spec, "n": n, "reps": reps, "b": b, "alpha": 0.05, "df": dfs, "seed": o.seed}),
                vec![OutputFile { name: "coverage.csv".into(), contents: s }],
                serde_json::to_value(&rows)?,
            )
        }
        "rate" => {
            let ns = [500, 2000, 8000, 32000];
            let reps = o.reps.unwrap_or(500);
            let pi = 1.0 / 3.0;
            let shrink = rate_experiment(1.0 / 3.0, 1.0, pi, &ns, reps, o.seed)?;
            let fixed = rate_experiment(0.0, 1.0, pi, &ns, reps, o.seed)?;
            let mut s = String::from("exponent,n,delta_n,q10_quarter,median_quarter,q90_quarter,q10_half,median_half,q90_half,abc_a,abc_b,abc_c\n");
            for t in [&shrink, &fixed] {
                for r in &t.rows {
                    writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        t.exponent, r.n, r.delta_n, r.quarter[0], r.quarter[1], r.quarter[2], r.half[0], r.half[1], r.half[2], r.abc[0], r.abc[1], r.abc[2]
                    )
                    .expect("string write");
                }
            }
            (
                json!({"pi": pi, "n": ns, "reps": reps, "exponents": [1.0 / 3.0, 0.0], "scale": 1.0, "seed": o.seed}),
                vec![OutputFile { name: "rate.csv".into(), contents: s }],
                json!({"shrinking": shrink, "fixed": fixed}),
            )
        }
        _ => unreachable!("ids are checked above"),
    };
    Ok(ReplicateBundle { id: id.to_string(), description, config, files, summary })
}
