//! One-sided noncompliance with Compliers and Never Takers.
//!
//! Stratum membership is observed among units assigned to treatment, so the
//! treatment-arm parameters are plain cell summaries. Under control the
//! outcome is a two-component normal mixture with the complier share as its
//! known weight. All inference runs on the standardized scale
//! `(y - grand mean) / sigma1`.

use crate::diagnostics::{forecast_bootstrap, PathologyForecast, DEFAULT_BOOTSTRAP};
use crate::error::{Error, Result};
use crate::estimators::{mle_known_var, EstimateResult, Interval, MleConfig};
use crate::inference::{
    berger_boos_pvalue_at, grid_bootstrap_1d, wald_invert_1d, wald_invert_2d, ConfidenceSet, ConfidenceSet2d,
    Grid2d, GridSpec, NuisanceRegion,
};
use crate::mixture::{sample_cumulants, CumulantEstimates, Sample};
use crate::num::{normal_quantile, StreamRng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Assignment, uptake and outcome per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSDataset {
    pub z: Vec<u8>,
    pub d: Vec<u8>,
    pub y: Vec<f64>,
}

/// Observed cell sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub treated_takers: usize,
    pub treated_never: usize,
    pub control: usize,
}

impl PSDataset {
    /// Checks lengths, binary codes, finite outcomes, one-sided
    /// noncompliance and that both arms are present.
    pub fn new(z: Vec<u8>, d: Vec<u8>, y: Vec<f64>) -> Result<Self> {
        if z.len() != d.len() || z.len() != y.len() {
            return Err(Error::Domain("z, d and y must have equal length".into()));
        }
        for (i, ((&zi, &di), &yi)) in z.iter().zip(&d).zip(&y).enumerate() {
            if zi > 1 || di > 1 {
                return Err(Error::Domain(format!("unit {i}: z and d must be 0 or 1")));
            }
            if zi == 0 && di == 1 {
                return Err(Error::Domain(format!(
                    "unit {i}: d = 1 under control violates one-sided noncompliance"
                )));
            }
            if !yi.is_finite() {
                return Err(Error::NonFinite { x: yi });
            }
        }
        let data = Self { z, d, y };
        let c = data.counts();
        if c.control == 0 {
            return Err(Error::EmptyCell("z=0".into()));
        }
        if c.treated_takers + c.treated_never == 0 {
            return Err(Error::EmptyCell("z=1".into()));
        }
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn counts(&self) -> CellCounts {
        CellCounts {
            treated_takers: self.cell(1, 1).len(),
            treated_never: self.cell(1, 0).len(),
            control: self.cell(0, 0).len(),
        }
    }

    /// Outcomes in cell `(z, d)`.
    pub fn cell(&self, z: u8, d: u8) -> Vec<f64> {
        self.z
            .iter()
            .zip(&self.d)
            .zip(&self.y)
            .filter(|((&zi, &di), _)| zi == z && di == d)
            .map(|(_, &y)| y)
            .collect()
    }

    /// Reads `z,d,y` rows. A header naming the three columns in any order
    /// is optional; lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut order = [0usize, 1, 2];
        let (mut z, mut d, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(i as u64 + 1),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            if rec.len() != 3 {
                return Err(Error::Parse { line, message: format!("expected 3 fields z,d,y, found {}", rec.len()) });
            }
            if y.is_empty() && rec.iter().any(|f| f.parse::<f64>().is_err()) {
                for (k, name) in ["z", "d", "y"].iter().enumerate() {
                    order[k] = rec.iter().position(|f| f.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Parse {
                        line,
                        message: format!("header must name columns z, d and y, found {:?}", rec.iter().collect::<Vec<_>>()),
                    })?;
                }
                continue;
            }
            let bit = |k: usize, name: &str| -> Result<u8> {
                match &rec[order[k]] {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    f => Err(Error::Parse { line, message: format!("{name} = {f:?} must be 0 or 1") }),
                }
            };
            let zi = bit(0, "z")?;
            let di = bit(1, "d")?;
            let f = &rec[order[2]];
            let yi: f64 = f
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse { line, message: format!("outcome {f:?} is not a finite number") })?;
            if zi == 0 && di == 1 {
                return Err(Error::Parse { line, message: "d = 1 under control violates one-sided noncompliance".into() });
            }
            z.push(zi);
            d.push(di);
            y.push(yi);
        }
        Self::new(z, d, y)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "z,d,y")?;
        for ((z, d), y) in self.z.iter().zip(&self.d).zip(&self.y) {
            writeln!(w, "{z},{d},{y}")?;
        }
        Ok(())
    }
}

/// Affine map between raw outcomes and effect-size units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: f64,
    pub scale: f64,
}

impl Standardization {
    pub fn apply(&self, y: f64) -> f64 {
        (y - self.center) / self.scale
    }

    /// A standardized level (a mean) on the raw scale.
    pub fn level_to_raw(&self, v: f64) -> f64 {
        self.center + self.scale * v
    }

    /// A standardized difference (an effect) on the raw scale.
    pub fn effect_to_raw(&self, v: f64) -> f64 {
        self.scale * v
    }

    pub fn effects_to_raw(&self, set: &[Interval]) -> Vec<Interval> {
        set.iter().map(|i| Interval::new(self.effect_to_raw(i.lo), self.effect_to_raw(i.hi))).collect()
    }
}

/// Treatment-arm summaries on the standardized scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentArm {
    pub counts: CellCounts,
    /// Complier share among units assigned to treatment.
    pub pi: f64,
    pub mu_c1: f64,
    pub sigma_c1: f64,
    /// `None` when every treated unit takes up treatment.
    pub mu_n1: Option<f64>,
    pub sigma_n1: Option<f64>,
}

/// Control-arm inference for `(mu_c0, mu_n0)`, with `delta = mu_c0 - mu_n0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlArm {
    pub mle: EstimateResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_gridboot: Option<ConfidenceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_wald: Option<ConfidenceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_berger_boos: Option<ConfidenceSet>,
    /// Joint set for `(mu_c0, mu_n0)`; axis 0 is `mu_c0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<ConfidenceSet2d>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<PathologyForecast>,
}

/// ITT sets as unions of disjoint intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IttSets {
    pub alpha: f64,
    pub itt_c: Vec<Interval>,
    pub itt_n: Vec<Interval>,
    /// Treatment-arm intervals at level `alpha / 2`.
    pub mu_c1: Interval,
    pub mu_n1: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSEstimates {
    pub standardization: Standardization,
    pub treatment: TreatmentArm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlArm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub itt: Option<IttSets>,
    /// Wald intervals from the MLE, for comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub itt_mle: Option<IttSets>,
}

impl PSEstimates {
    /// Standardized control-arm outcomes.
    pub fn control_sample(&self, data: &PSDataset) -> Sample<f64> {
        Sample::new(data.cell(0, 0).into_iter().map(|v| self.standardization.apply(v)).collect())
    }
}

fn moments(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    let v = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Cell summaries of the treatment arm and the standardization constants.
/// The scale is `sqrt(pi s_c1^2 + (1 - pi) s_n1^2)`, so the treated
/// outcomes have unit pooled within-stratum variance.
pub fn fit_treatment_arm(data: &PSDataset) -> Result<PSEstimates> {
    let counts = data.counts();
    if counts.treated_takers < 2 {
        return Err(Error::EmptyCell(format!(
            "z=1,d=1 has {} unit(s); at least 2 are needed",
            counts.treated_takers
        )));
    }
    if counts.treated_never == 1 {
        return Err(Error::EmptyCell("z=1,d=0 has 1 unit; at least 2 are needed".into()));
    }
    let pi = counts.treated_takers as f64 / (counts.treated_takers + counts.treated_never) as f64;
    let (mc, sc) = moments(&data.cell(1, 1));
    let never = (counts.treated_never >= 2).then(|| moments(&data.cell(1, 0)));
    let var = pi * sc * sc + never.map_or(0.0, |(_, s)| (1.0 - pi) * s * s);
    if !(var > 0.0) {
        return Err(Error::Degenerate("treatment-arm outcomes have zero variance".into()));
    }
    let center = data.y.iter().sum::<f64>() / data.len() as f64;
    let st = Standardization { center, scale: var.sqrt() };
    Ok(PSEstimates {
        standardization: st,
        treatment: TreatmentArm {
            counts,
            pi,
            mu_c1: st.apply(mc),
            sigma_c1: sc / st.scale,
            mu_n1: never.map(|(m, _)| st.apply(m)),
            sigma_n1: never.map(|(_, s)| s / st.scale),
        },
        control: None,
        itt: None,
        itt_mle: None,
    })
}

/// Control-arm inference method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMethod {
    Mle,
    GridBootstrap,
    WaldInvert2d,
}

/// Berger-Boos settings for propagating uncertainty in `(pi, sigma^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BergerBoosConfig {
    pub gamma: f64,
    pub lattice: usize,
    /// Treatment-arm resamples defining the nuisance region.
    pub draws: usize,
    pub b: usize,
    pub grid: GridSpec,
}

impl Default for BergerBoosConfig {
    fn default() -> Self {
        Self { gamma: 0.001, lattice: 7, draws: 1000, b: 199, grid: GridSpec { lo: -3.0, hi: 3.0, points: 61 } }
    }
}

/// Fully resolved settings of a principal-stratification analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSConfig {
    pub alpha: f64,
    pub seed: u64,
    pub b: usize,
    pub forecast_b: usize,
    pub delta_grid: GridSpec,
    pub mean_grid: GridSpec,
    pub mle: MleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub berger_boos: Option<BergerBoosConfig>,
}

impl Default for PSConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            seed: 20_240_601,
            b: DEFAULT_BOOTSTRAP,
            forecast_b: DEFAULT_BOOTSTRAP,
            delta_grid: GridSpec { lo: -3.0, hi: 3.0, points: 601 },
            mean_grid: GridSpec { lo: -2.5, hi: 2.5, points: 201 },
            mle: MleConfig::default(),
            berger_boos: None,
        }
    }
}

impl PSConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.delta_grid.validate()?;
        self.mean_grid.validate()
    }
}

fn require_mixture(est: &PSEstimates) -> Result<()> {
    let pi = est.treatment.pi;
    if est.treatment.mu_n1.is_none() || pi >= 1.0 {
        return Err(Error::Degenerate(
            "no never takers under treatment (pi = 1); the control arm is not a mixture".into(),
        ));
    }
    if pi == 0.5 {
        return Err(Error::SignUnidentifiable(
            "complier share is exactly 0.5, so the third cumulant cannot order the strata; \
             inspect the joint (mu_c0, mu_n0) set instead of a separation estimate"
                .into(),
        ));
    }
    Ok(())
}

/// Control-arm inference with `pi` fixed at its treatment-arm estimate and
/// unit component SD. The MLE is always computed; `method` adds either the
/// grid-bootstrap separation set or the joint Wald set at level `alpha`.
pub fn infer_control_arm(
    data: &PSDataset,
    est: &PSEstimates,
    method: ControlMethod,
    alpha: f64,
    cfg: &PSConfig,
) -> Result<PSEstimates> {
    require_mixture(est)?;
    let pi = est.treatment.pi;
    let y = est.control_sample(data);
    let mle = mle_known_var(&y, pi, 1.0, &cfg.mle)?;
    let mut control = ControlArm {
        mle,
        delta_gridboot: None,
        delta_wald: None,
        delta_berger_boos: None,
        joint: None,
        forecast: None,
    };
    match method {
        ControlMethod::Mle => {}
        ControlMethod::GridBootstrap => {
            let rng = StreamRng::keyed(cfg.seed, &[1]);
            control.delta_gridboot = Some(grid_bootstrap_1d(&y, pi, 1.0, &cfg.delta_grid, cfg.b, alpha, &rng)?);
        }
        ControlMethod::WaldInvert2d => {
            let g = Grid2d { mu0: cfg.mean_grid, mu1: cfg.mean_grid };
            control.joint = Some(wald_invert_2d(&y, pi, 1.0, &g, alpha)?);
        }
    }
    let mut out = est.clone();
    out.control = Some(control);
    Ok(out)
}

/// `A - B` for closed intervals.
pub fn interval_difference(a: Interval, b: Interval) -> Interval {
    Interval::new(a.lo - b.hi, a.hi - b.lo)
}

/// Sorts and merges overlapping intervals.
pub fn union(mut set: Vec<Interval>) -> Vec<Interval> {
    set.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(set.len());
    for i in set {
        match out.last_mut() {
            Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
            _ => out.push(i),
        }
    }
    out
}

/// `{a - b : a in A, b in B}` for unions of intervals.
pub fn set_difference(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    union(a.iter().flat_map(|&x| b.iter().map(move |&y| interval_difference(x, y))).collect())
}

/// Two-sided normal interval for a cell mean at level `alpha`.
pub fn mean_interval(mean: f64, sd: f64, n: usize, alpha: f64) -> Result<Interval> {
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let h = z * sd / (n as f64).sqrt();
    Ok(Interval::new(mean - h, mean + h))
}

fn treatment_intervals(est: &PSEstimates, alpha: f64) -> Result<(Interval, Interval)> {
    let t = &est.treatment;
    let (mn, sn) = t.mu_n1.zip(t.sigma_n1).ok_or_else(|| Error::EmptyCell("z=1,d=0".into()))?;
    Ok((
        mean_interval(t.mu_c1, t.sigma_c1, t.counts.treated_takers, alpha)?,
        mean_interval(mn, sn, t.counts.treated_never, alpha)?,
    ))
}

/// Confidence sets for `ITT_c = mu_c1 - mu_c0` and `ITT_n = mu_n1 - mu_n0`
/// at level `alpha`, combining `alpha / 2` treatment intervals with the
/// projections of the joint control set, which must be at level
/// `alpha / 2`. Disjoint control segments are handled one at a time.
pub fn itt_confidence_sets(est: &PSEstimates, alpha: f64) -> Result<IttSets> {
    let joint = est
        .control
        .as_ref()
        .and_then(|c| c.joint.as_ref())
        .ok_or_else(|| Error::Config("ITT sets need the joint control-arm set".into()))?;
    if (joint.alpha - alpha / 2.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "joint control set is at level {}, expected alpha / 2 = {}",
            joint.alpha,
            alpha / 2.0
        )));
    }
    let (c1, n1) = treatment_intervals(est, alpha / 2.0)?;
    let itt_c = set_difference(&[c1], &joint.mu0_projection);
    let itt_n = set_difference(&[n1], &joint.mu1_projection);
    let warning = (itt_c.is_empty() || itt_n.is_empty())
        .then(|| "empty control-arm set: the normal mixture model fits the control outcomes poorly".to_string());
    Ok(IttSets { alpha, itt_c, itt_n, mu_c1: c1, mu_n1: n1, warning })
}

/// Wald intervals for the ITT effects from the control-arm MLE and its
/// Hessian covariance, with independent treatment-arm means.
pub fn itt_mle_intervals(est: &PSEstimates, alpha: f64) -> Result<IttSets> {
    let control = est.control.as_ref().ok_or_else(|| Error::Config("control arm not fitted".into()))?;
    let t = &est.treatment;
    let (mn, sn) = t.mu_n1.zip(t.sigma_n1).ok_or_else(|| Error::EmptyCell("z=1,d=0".into()))?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let mut warning = None;
    let (itt_c, itt_n) = match control.mle.mean_cov {
        Some(cov) => {
            let vc = t.sigma_c1 * t.sigma_c1 / t.counts.treated_takers as f64 + cov[0][0];
            let vn = sn * sn / t.counts.treated_never as f64 + cov[1][1];
            let ec = t.mu_c1 - control.mle.mu0;
            let en = mn - control.mle.mu1;
            (
                vec![Interval::new(ec - z * vc.sqrt(), ec + z * vc.sqrt())],
                vec![Interval::new(en - z * vn.sqrt(), en + z * vn.sqrt())],
            )
        }
        None => {
            warning = Some("observed information is not negative definite at the MLE; no Wald interval".into());
            (vec![], vec![])
        }
    };
    Ok(IttSets {
        alpha,
        itt_c,
        itt_n,
        mu_c1: mean_interval(t.mu_c1, t.sigma_c1, t.counts.treated_takers, alpha)?,
        mu_n1: mean_interval(mn, sn, t.counts.treated_never, alpha)?,
        warning,
    })
}

/// Nuisance region for `(pi, sigma^2)` from case resamples of the treatment
/// arm, with `sigma^2` relative to the fitted standardization.
pub fn nuisance_region(data: &PSDataset, est: &PSEstimates, draws: usize, gamma: f64, rng: &StreamRng) -> Result<NuisanceRegion> {
    let treated: Vec<(u8, f64)> = data
        .z
        .iter()
        .zip(&data.d)
        .zip(&data.y)
        .filter(|((&z, _), _)| z == 1)
        .map(|((_, &d), &y)| (d, est.standardization.apply(y)))
        .collect();
    let n = treated.len();
    let mut out = Vec::with_capacity(draws);
    for r in 0..draws as u64 {
        let mut g = rng.fork(r);
        let (mut c, mut nv) = (Vec::new(), Vec::new());
        for _ in 0..n {
            let (d, y) = treated[g.random_range(0..n)];
            if d == 1 {
                c.push(y)
            } else {
                nv.push(y)
            }
        }
        if c.len() < 2 || nv.len() < 2 {
            continue;
        }
        let p = c.len() as f64 / n as f64;
        let (_, sc) = moments(&c);
        let (_, sn) = moments(&nv);
        out.push([p, p * sc * sc + (1.0 - p) * sn * sn]);
    }
    NuisanceRegion::from_draws(&out, gamma)
}

/// Report of a complete analysis with its resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSReport {
    pub version: String,
    pub config: PSConfig,
    pub estimates: PSEstimates,
    /// ITT sets on the raw outcome scale.
    pub raw_itt_c: Vec<Interval>,
    pub raw_itt_n: Vec<Interval>,
    pub raw_itt_mle_c: Vec<Interval>,
    pub raw_itt_mle_n: Vec<Interval>,
}

impl PSReport {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Full pipeline: treatment-arm fit, control-arm MLE, grid-bootstrap and
/// Wald separation sets, the joint set at `alpha / 2`, ITT sets, MLE ITT
/// intervals, the bootstrap pathology forecast and, if configured, a
/// Berger-Boos separation set.
pub fn analyze(data: &PSDataset, cfg: &PSConfig) -> Result<PSReport> {
    cfg.validate()?;
    let est = fit_treatment_arm(data)?;
    let mut est = infer_control_arm(data, &est, ControlMethod::GridBootstrap, cfg.alpha, cfg)?;
    let joint = infer_control_arm(data, &est, ControlMethod::WaldInvert2d, cfg.alpha / 2.0, cfg)?;
    let pi = est.treatment.pi;
    let y = est.control_sample(data);
    {
        let c = est.control.as_mut().expect("control arm fitted");
        c.joint = joint.control.and_then(|j| j.joint);
        c.delta_wald = Some(wald_invert_1d(&y, pi, 1.0, &cfg.delta_grid, cfg.alpha)?);
        c.forecast = Some(forecast_bootstrap(&y, pi, 1.0, cfg.forecast_b, &StreamRng::keyed(cfg.seed, &[2]))?);
    }
    if let Some(bb) = &cfg.berger_boos {
        let region = nuisance_region(data, &est, bb.draws, bb.gamma, &StreamRng::keyed(cfg.seed, &[3]))?;
        let pts = region.lattice(bb.lattice);
        let rng = StreamRng::keyed(cfg.seed, &[4]);
        let grid = bb.grid.values();
        let p = grid
            .iter()
            .map(|&d| berger_boos_pvalue_at(&y, d, &pts, bb.gamma, bb.b, &rng))
            .collect::<Result<Vec<f64>>>()?;
        est.control.as_mut().expect("control arm fitted").delta_berger_boos =
            Some(ConfidenceSet::from_p_values(grid, p, cfg.alpha));
    }
    est.itt = Some(itt_confidence_sets(&est, cfg.alpha)?);
    est.itt_mle = Some(itt_mle_intervals(&est, cfg.alpha)?);
    let st = est.standardization;
    let itt = est.itt.as_ref().expect("set above");
    let mle = est.itt_mle.as_ref().expect("set above");
    Ok(PSReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        raw_itt_c: st.effects_to_raw(&itt.itt_c),
        raw_itt_n: st.effects_to_raw(&itt.itt_n),
        raw_itt_mle_c: st.effects_to_raw(&mle.itt_c),
        raw_itt_mle_n: st.effects_to_raw(&mle.itt_n),
        config: cfg.clone(),
        estimates: est,
    })
}

/// The bundled synthetic dataset calibrated to published JOBS II cell
/// summaries. It is not the study microdata.
pub fn jobs2_synthetic() -> PSDataset {
    PSDataset::read_csv(include_str!("../data/jobs2_synthetic.csv").as_bytes()).expect("bundled dataset parses")
}

/// k-statistics of the standardized control arm.
pub fn control_cumulants(data: &PSDataset, est: &PSEstimates) -> Result<CumulantEstimates<f64>> {
    sample_cumulants(&est.control_sample(data).y)
}
