//! Seeded Monte Carlo studies: bias, coverage and pathology frequencies per
//! design cell, plus the rate, indicator, misspecification and covariate
//! experiments and the named presets behind the `replicate` command.
//!
//! Replicate `r` of cell `c` draws from `StreamRng::keyed(seed, [c, r, k])`,
//! so results do not depend on the thread count.

mod experiments;
pub mod presets;

pub use experiments::{
    bootstrap_cumulants, conditional_mle_magnitude, covariate_joint_table, misspecification_study, rate_experiment,
    validate_mom_indicators, ConditionalMagnitude, IndicatorGrid, IndicatorRow, JointTable, MisspecRow, RateRow,
    RateTable,
};

use crate::error::{Error, Result};
use crate::estimators::{
    classify_delta, mle_known_var, mle_unknown_equal_var, mle_unknown_unequal_var, mom_kappa3, mom_known_var,
    EstimateResult, EstimatorKind, MleConfig, Pathology, PILEUP_TOL,
};
use crate::inference::{grid_bootstrap_pvalue, wald_pvalue_2};
use crate::mixture::{MixtureSpec, Sample};
use crate::num::StreamRng;
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Smallest replicate count accepted by [`run_study`].
pub const MIN_REPS: usize = 100;
/// Largest tolerated share of failed replicates before a cell is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.05;
/// Conditional aggregates need at least this many replicates.
pub const MIN_CONDITIONAL: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Data-generating process of a design cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Gaussian { spec: MixtureSpec<f64> },
    /// Each component is `mean + sd * T / sqrt(df / (df - 2))`, so its SD
    /// equals the spec's.
    TMixture { df: f64, spec: MixtureSpec<f64> },
    ThreeComponent { components: [Component; 3] },
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Gaussian { spec } => spec.validate(),
            Generator::TMixture { df, spec } => {
                if !(*df > 2.0) {
                    return Err(Error::Config(format!("t components need df > 2, got {df}")));
                }
                spec.validate()
            }
            Generator::ThreeComponent { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight > 0.0) || !(c.sd > 0.0) || !c.mean.is_finite())
                    || (total - 1.0).abs() > 1e-9
                {
                    return Err(Error::Config("three-component weights must be positive and sum to 1, SDs positive".into()));
                }
                Ok(())
            }
        }
    }

    /// The two-component spec, when there is one.
    pub fn spec(&self) -> Option<&MixtureSpec<f64>> {
        match self {
            Generator::Gaussian { spec } | Generator::TMixture { spec, .. } => Some(spec),
            Generator::ThreeComponent { .. } => None,
        }
    }

    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> Result<Sample<f64>> {
        match self {
            Generator::Gaussian { spec } => spec.sample(n, rng),
            Generator::TMixture { df, spec } => {
                let t = StudentT::new(*df).map_err(|e| Error::Config(e.to_string()))?;
                let k = (df / (df - 2.0)).sqrt();
                Ok(Sample::new(
                    (0..n)
                        .map(|_| {
                            let first = rng.random::<f64>() < spec.pi;
                            let e: f64 = rng.sample(t) / k;
                            if first {
                                spec.mu0 + spec.sigma0 * e
                            } else {
                                spec.mu1 + spec.sigma1 * e
                            }
                        })
                        .collect(),
                ))
            }
            Generator::ThreeComponent { components } => Ok(Sample::new(
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let c = if u < components[0].weight {
                            components[0]
                        } else if u < components[0].weight + components[1].weight {
                            components[1]
                        } else {
                            components[2]
                        };
                        let z: f64 = rng.sample(StandardNormal);
                        c.mean + c.sd * z
                    })
                    .collect(),
            )),
        }
    }

    fn label(&self) -> String {
        match self {
            Generator::Gaussian { .. } => "gaussian".into(),
            Generator::TMixture { df, .. } => format!("t{df}"),
            Generator::ThreeComponent { .. } => "three-component".into(),
        }
    }
}

/// Parameters the estimators assume, and the truth they are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingModel {
    pub pi: f64,
    pub sigma: f64,
    pub truth_delta: f64,
}

/// One design cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub generator: Generator,
    pub n: usize,
    /// Defaults to the generator's two-component spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working: Option<WorkingModel>,
}

impl CellSpec {
    pub fn gaussian(pi: f64, delta: f64, sigma: f64, n: usize) -> Result<Self> {
        Ok(Self { generator: Generator::Gaussian { spec: MixtureSpec::zero_mean(pi, delta, sigma)? }, n, working: None })
    }

    pub fn working(&self) -> Result<WorkingModel> {
        if let Some(w) = self.working {
            return Ok(w);
        }
        let s = self
            .generator
            .spec()
            .ok_or_else(|| Error::Config("a three-component cell needs an explicit working model".into()))?;
        Ok(WorkingModel { pi: s.pi, sigma: s.sigma0, truth_delta: s.delta() })
    }
}

/// Coverage of a nominal `1 - alpha` set for the separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMethod {
    /// Estimate +- z * Hessian SE from the known-variance MLE.
    MleWald,
    /// Chi-square(2) inversion of the cumulant Wald test.
    WaldInversion,
    /// Grid-bootstrap inversion.
    GridBootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub cells: Vec<CellSpec>,
    pub reps: usize,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub inference: Vec<CoverageMethod>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Grid-bootstrap replicates.
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default)]
    pub keep_replicates: bool,
    #[serde(default)]
    pub mle: MleConfig,
}

fn default_b() -> usize {
    499
}

fn default_alpha() -> f64 {
    0.05
}

impl StudyConfig {
    pub fn new(cells: Vec<CellSpec>, reps: usize, estimators: Vec<EstimatorKind>, seed: u64) -> Self {
        Self {
            cells,
            reps,
            estimators,
            inference: vec![],
            alpha: 0.05,
            seed,
            b: default_b(),
            keep_replicates: false,
            mle: MleConfig::default(),
        }
    }

    /// Zero-mean homoskedastic cells over the product of the grids.
    pub fn grid(pis: &[f64], deltas: &[f64], ns: &[usize], sigma: f64) -> Result<Vec<CellSpec>> {
        let mut out = Vec::new();
        for &pi in pis {
            for &d in deltas {
                for &n in ns {
                    out.push(CellSpec::gaussian(pi, d, sigma, n)?);
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::Config(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        if self.cells.is_empty() {
            return Err(Error::Config("no design cells".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.inference.contains(&CoverageMethod::GridBootstrap) && self.b < 99 {
            return Err(Error::Config(format!("grid bootstrap needs b >= 99, got {}", self.b)));
        }
        for e in &self.estimators {
            if matches!(e, EstimatorKind::MomCovariateAdjusted | EstimatorKind::MomIv) {
                return Err(Error::UnsupportedModel(format!("{e:?} needs covariate data; use covariate_joint_table")));
            }
        }
        for c in &self.cells {
            c.generator.validate()?;
            let w = c.working()?;
            if c.n < 10 {
                return Err(Error::Config(format!("cell sample size {} is below 10", c.n)));
            }
            if !(w.pi > 0.0 && w.pi < 1.0) || !(w.sigma > 0.0) || w.truth_delta == 0.0 {
                return Err(Error::Config("working model needs pi in (0, 1), sigma > 0 and a nonzero truth".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub cell: usize,
    pub rep: usize,
    /// Per estimator; `None` when undefined or failed.
    pub delta: Vec<Option<f64>>,
    /// Per estimator; `None` when the estimator failed.
    pub pathology: Vec<Option<Pathology>>,
    /// Per coverage method; `None` when the method failed.
    pub covered: Vec<Option<bool>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

/// Pathology counts and frequencies with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyFreq {
    pub count: [usize; 3],
    pub freq: [f64; 3],
    pub se: [f64; 3],
}

impl PathologyFreq {
    pub const ORDER: [Pathology; 3] = [Pathology::Correct, Pathology::PileUp, Pathology::SignError];

    pub fn from_counts(count: [usize; 3]) -> Self {
        let n = count.iter().sum::<usize>().max(1) as f64;
        let p1 = count[1] as f64 / n;
        let p2 = count[2] as f64 / n;
        let freq = [1.0 - p1 - p2, p1, p2];
        let freq = if count.iter().sum::<usize>() == 0 { [0.0; 3] } else { freq };
        let se = freq.map(|p| (p * (1.0 - p) / n).sqrt());
        Self { count, freq, se }
    }

    pub fn of(&self, p: Pathology) -> f64 {
        self.freq[index(p)]
    }
}

fn index(p: Pathology) -> usize {
    match p {
        Pathology::Correct => 0,
        Pathology::PileUp => 1,
        Pathology::SignError => 2,
    }
}

/// Aggregates restricted to replicates with one pathology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditional {
    pub pathology: Pathology,
    pub count: usize,
    /// Present only with at least [`MIN_CONDITIONAL`] replicates.
    pub mean: Option<f64>,
    pub bias: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub ok: usize,
    /// Undefined estimates count as zero.
    pub mean: f64,
    pub bias: f64,
    pub rmse: f64,
    pub pathology: PathologyFreq,
    pub conditional: Vec<Conditional>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCoverage {
    pub pathology: Pathology,
    pub count: usize,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub method: CoverageMethod,
    pub ok: usize,
    pub coverage: f64,
    pub se: f64,
    /// Conditional on the pathology of the first estimator.
    pub conditional: Vec<ConditionalCoverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: usize,
    pub generator: String,
    pub n: usize,
    pub working: WorkingModel,
    pub reps: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    pub estimators: Vec<EstimatorSummary>,
    pub coverage: Vec<CoverageSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub version: String,
    pub config: StudyConfig,
    pub cells: Vec<CellResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<Vec<ReplicateRecord>>,
}

/// Runs one estimator with the working `pi` and `sigma`.
pub fn run_estimator(kind: EstimatorKind, y: &Sample<f64>, pi: f64, sigma: f64, cfg: &MleConfig) -> Result<EstimateResult> {
    match kind {
        EstimatorKind::MleKnownVar => mle_known_var(y, pi, sigma, cfg),
        EstimatorKind::MleUnknownEqualVar => mle_unknown_equal_var(y, pi, cfg),
        EstimatorKind::MleUnknownUnequalVar => mle_unknown_unequal_var(y, pi, cfg),
        EstimatorKind::MomKnownVar => mom_known_var(y, pi, sigma),
        EstimatorKind::MomKappa3 => mom_kappa3(y, pi),
        EstimatorKind::MomCovariateAdjusted | EstimatorKind::MomIv => {
            Err(Error::UnsupportedModel(format!("{kind:?} needs covariate data")))
        }
    }
}

fn replicate(cfg: &StudyConfig, cell_id: usize, rep: usize) -> ReplicateRecord {
    let cell = &cfg.cells[cell_id];
    let w = cell.working().expect("validated");
    let keys = |k: u64| StreamRng::keyed(cfg.seed, &[cell_id as u64, rep as u64, k]);
    let mut rec = ReplicateRecord {
        cell: cell_id,
        rep,
        delta: Vec::with_capacity(cfg.estimators.len()),
        pathology: Vec::with_capacity(cfg.estimators.len()),
        covered: Vec::with_capacity(cfg.inference.len()),
        failures: vec![],
    };
    let y = match cell.generator.sample(cell.n, &mut keys(0)) {
        Ok(y) => y,
        Err(e) => {
            rec.failures.push(format!("generator: {e}"));
            rec.delta = vec![None; cfg.estimators.len()];
            rec.pathology = vec![None; cfg.estimators.len()];
            rec.covered = vec![None; cfg.inference.len()];
            return rec;
        }
    };
    let tol = PILEUP_TOL * w.sigma;
    let mut mle_kv: Option<Result<EstimateResult>> = None;
    for &kind in &cfg.estimators {
        let r = run_estimator(kind, &y, w.pi, w.sigma, &cfg.mle);
        match &r {
            Ok(e) => {
                rec.delta.push(e.delta);
                rec.pathology.push(classify_delta(e.delta, w.truth_delta, tol).ok());
            }
            Err(err) => {
                rec.delta.push(None);
                rec.pathology.push(None);
                rec.failures.push(format!("{kind:?}: {err}"));
            }
        }
        if kind == EstimatorKind::MleKnownVar {
            mle_kv = Some(r);
        }
    }
    let k = y.cumulants();
    for &m in &cfg.inference {
        let covered = match m {
            CoverageMethod::MleWald => {
                let r = mle_kv.get_or_insert_with(|| mle_known_var(&y, w.pi, w.sigma, &cfg.mle));
                // A missing Hessian SE gives no interval, which cannot cover.
                r.as_ref()
                    .map(|e| e.wald_ci.is_some_and(|ci| ci.contains(w.truth_delta)))
                    .map_err(|e| Error::Optimizer(e.to_string()))
            }
            CoverageMethod::WaldInversion => k
                .as_ref()
                .map_err(|e| Error::InsufficientData(e.to_string()))
                .and_then(|k| wald_pvalue_2(k, w.pi, w.truth_delta, w.sigma))
                .map(|p| p > cfg.alpha),
            CoverageMethod::GridBootstrap => k
                .as_ref()
                .map_err(|e| Error::InsufficientData(e.to_string()))
                .and_then(|k| grid_bootstrap_pvalue(k, w.pi, w.truth_delta, w.sigma, cfg.b, &keys(1)))
                .map(|p| p > cfg.alpha),
        };
        match covered {
            Ok(c) => rec.covered.push(Some(c)),
            Err(e) => {
                rec.covered.push(None);
                rec.failures.push(format!("{m:?}: {e}"));
            }
        }
    }
    rec
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn summarize(cfg: &StudyConfig, cell_id: usize, recs: &[ReplicateRecord]) -> CellResult {
    let cell = &cfg.cells[cell_id];
    let w = cell.working().expect("validated");
    let failed = recs.iter().filter(|r| !r.failures.is_empty()).count();
    let mut out = CellResult {
        cell: cell_id,
        generator: cell.generator.label(),
        n: cell.n,
        working: w,
        reps: recs.len(),
        failed,
        aborted: None,
        estimators: vec![],
        coverage: vec![],
    };
    if failed as f64 > MAX_FAILURE_RATE * recs.len() as f64 {
        let first = recs.iter().find_map(|r| r.failures.first().cloned()).unwrap_or_default();
        out.aborted = Some(format!("{failed} of {} replicates failed; first failure: {first}", recs.len()));
        return out;
    }
    for (j, &kind) in cfg.estimators.iter().enumerate() {
        let ok: Vec<(f64, Pathology)> =
            recs.iter().filter_map(|r| r.pathology[j].map(|p| (r.delta[j].unwrap_or(0.0), p))).collect();
        let est: Vec<f64> = ok.iter().map(|o| o.0).collect();
        let m = if est.is_empty() { f64::NAN } else { mean(&est) };
        let rmse = (est.iter().map(|d| (d - w.truth_delta).powi(2)).sum::<f64>() / est.len() as f64).sqrt();
        let mut count = [0usize; 3];
        for o in &ok {
            count[index(o.1)] += 1;
        }
        let conditional = PathologyFreq::ORDER
            .iter()
            .map(|&p| {
                let sub: Vec<f64> = ok.iter().filter(|o| o.1 == p).map(|o| o.0).collect();
                let m = (sub.len() >= MIN_CONDITIONAL).then(|| mean(&sub));
                Conditional { pathology: p, count: sub.len(), mean: m, bias: m.map(|m| m - w.truth_delta) }
            })
            .collect();
        out.estimators.push(EstimatorSummary {
            estimator: kind,
            ok: ok.len(),
            mean: m,
            bias: m - w.truth_delta,
            rmse,
            pathology: PathologyFreq::from_counts(count),
            conditional,
        });
    }
    for (j, &method) in cfg.inference.iter().enumerate() {
        let ok: Vec<(bool, Option<Pathology>)> =
            recs.iter().filter_map(|r| r.covered[j].map(|c| (c, r.pathology.first().copied().flatten()))).collect();
        let n = ok.len() as f64;
        let cov = ok.iter().filter(|o| o.0).count() as f64 / n;
        let conditional = if cfg.estimators.is_empty() {
            vec![]
        } else {
            PathologyFreq::ORDER
                .iter()
                .map(|&p| {
                    let sub: Vec<bool> = ok.iter().filter(|o| o.1 == Some(p)).map(|o| o.0).collect();
                    let c = (sub.len() >= MIN_CONDITIONAL)
                        .then(|| sub.iter().filter(|&&c| c).count() as f64 / sub.len() as f64);
                    ConditionalCoverage { pathology: p, count: sub.len(), coverage: c }
                })
                .collect()
        };
        out.coverage.push(CoverageSummary { method, ok: ok.len(), coverage: cov, se: (cov * (1.0 - cov) / n).sqrt(), conditional });
    }
    out
}

/// Runs every replicate of every cell and aggregates per cell.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.cells.len()).flat_map(|c| (0..cfg.reps).map(move |r| (c, r))).collect();
    let recs: Vec<ReplicateRecord> = jobs.into_par_iter().map(|(c, r)| replicate(cfg, c, r)).collect();
    let cells = (0..cfg.cells.len())
        .map(|c| summarize(cfg, c, &recs[c * cfg.reps..(c + 1) * cfg.reps]))
        .collect();
    Ok(StudyResult {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        cells,
        replicates: cfg.keep_replicates.then_some(recs),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl StudyResult {
    /// One row per cell and estimator.
    pub fn write_estimator_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "cell,generator,n,pi,sigma,delta,estimator,ok,mean,bias,rmse,p_correct,p_pileup,p_signerror,se_correct,se_pileup,se_signerror,\
             mean_correct,mean_pileup,mean_signerror"
        )?;
        for c in &self.cells {
            for e in &c.estimators {
                let f = &e.pathology;
                let cm: Vec<String> = e.conditional.iter().map(|x| opt(x.mean)).collect();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.cell,
                    c.generator,
                    c.n,
                    c.working.pi,
                    c.working.sigma,
                    c.working.truth_delta,
                    kebab(&e.estimator),
                    e.ok,
                    e.mean,
                    e.bias,
                    e.rmse,
                    f.freq[0],
                    f.freq[1],
                    f.freq[2],
                    f.se[0],
                    f.se[1],
                    f.se[2],
                    cm.join(",")
                )?;
            }
        }
        Ok(())
    }

    /// One row per cell and coverage method.
    pub fn write_coverage_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cell,generator,n,pi,sigma,delta,method,ok,coverage,se,coverage_correct,coverage_pileup,coverage_signerror")?;
        for c in &self.cells {
            for m in &c.coverage {
                let cc: Vec<String> = if m.conditional.is_empty() {
                    vec![String::new(); 3]
                } else {
                    m.conditional.iter().map(|x| opt(x.coverage)).collect()
                };
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    c.cell,
                    c.generator,
                    c.n,
                    c.working.pi,
                    c.working.sigma,
                    c.working.truth_delta,
                    kebab(&m.method),
                    m.ok,
                    m.coverage,
                    m.se,
                    cc.join(",")
                )?;
            }
        }
        Ok(())
    }

    /// Per-replicate estimates, when kept.
    pub fn write_replicates_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let recs = self.replicates.as_ref().ok_or_else(|| Error::Config("replicates were not kept".into()))?;
        let names: Vec<String> = self.config.estimators.iter().map(kebab).collect();
        writeln!(w, "cell,rep,n,delta_true,estimator,estimate,pathology")?;
        for r in recs {
            let c = &self.cells[r.cell];
            for (j, name) in names.iter().enumerate() {
                let p = r.pathology[j].map(|p| kebab(&p)).unwrap_or_else(|| "failed".into());
                writeln!(w, "{},{},{},{},{},{},{}", r.cell, r.rep, c.n, c.working.truth_delta, name, opt(r.delta[j]), p)?;
            }
        }
        Ok(())
    }
}

/// The serde name of a unit enum variant.
pub(crate) fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|s| s.as_str().map(str::to_string)).unwrap_or_default()
}
