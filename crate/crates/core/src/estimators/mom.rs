use super::{check_pi, shape_of, EstimateResult, EstimatorKind, Interval, Shape, PILEUP_TOL};
use crate::error::{Error, Result};
use crate::mixture::{sample_cumulants, CumulantEstimates, Sample};

fn base(kind: EstimatorKind, delta: Option<f64>, k: &CumulantEstimates<f64>, pi: f64) -> EstimateResult {
    let d = delta.unwrap_or(0.0);
    let mu1 = k.k1 - pi * d;
    EstimateResult {
        kind,
        delta,
        mu0: mu1 + d,
        mu1,
        sigma0: None,
        sigma1: None,
        se: None,
        wald_ci: None,
        shape: Shape::Unimodal,
        local_optima: vec![],
        loglik: None,
        mean_cov: None,
        cells: vec![],
        notes: vec![],
    }
}

/// Moment estimator from `(k2, k3)` with known component SD.
pub fn mom_from_cumulants(k: &CumulantEstimates<f64>, pi: f64, sigma: f64) -> Result<EstimateResult> {
    check_pi(pi)?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let q = pi * (1.0 - pi);
    let excess = k.k2 - sigma * sigma;
    let delta = if excess < 0.0 {
        None
    } else {
        // kappa3 carries the sign of delta times (1 - 2 pi); zero k3 falls
        // to the positive branch.
        let s = if k.k3 * (1.0 - 2.0 * pi) < 0.0 { -1.0 } else { 1.0 };
        Some(s * (excess / q).sqrt())
    };
    let mut r = base(EstimatorKind::MomKnownVar, delta, k, pi);
    r.sigma0 = Some(sigma);
    r.sigma1 = Some(sigma);
    let tol = PILEUP_TOL * sigma;
    r.shape = match delta {
        None => Shape::Unimodal,
        Some(d) => shape_of(d, &[], 0.0, tol),
    };
    if delta.is_none() {
        r.notes.push("pile-up: sample variance below the component variance".into());
    }
    Ok(r)
}

/// Known-variance moment estimator,
/// `sgn(k3 (1 - 2 pi)) sqrt((k2 - sigma^2) / (pi (1 - pi)))`; undefined
/// when `k2 < sigma^2`.
pub fn mom_known_var(y: &Sample<f64>, pi: f64, sigma: f64) -> Result<EstimateResult> {
    let k = sample_cumulants(&y.y)?;
    mom_from_cumulants(&k, pi, sigma)
}

/// Third-cumulant estimator `cbrt(k3 / (pi (1 - pi) (1 - 2 pi)))`, defined
/// for every sample.
pub fn mom_kappa3(y: &Sample<f64>, pi: f64) -> Result<EstimateResult> {
    if pi == 0.5 {
        return Err(Error::Degenerate("the third cumulant vanishes identically at pi = 0.5".into()));
    }
    check_pi(pi)?;
    let k = sample_cumulants(&y.y)?;
    let q = pi * (1.0 - pi);
    let d = (k.k3 / (q * (1.0 - 2.0 * pi))).cbrt();
    let mut r = base(EstimatorKind::MomKappa3, Some(d), &k, pi);
    let s2 = k.k2 - q * d * d;
    if s2 > 0.0 {
        r.sigma0 = Some(s2.sqrt());
        r.sigma1 = Some(s2.sqrt());
    } else {
        r.notes.push("implied component variance is not positive".into());
    }
    r.shape = shape_of(d, &[], 0.0, PILEUP_TOL * k.k2.max(0.0).sqrt());
    Ok(r)
}

fn cell(y: &Sample<f64>, level: u8) -> Result<Vec<f64>> {
    let v = y.cell(level)?;
    if v.is_empty() {
        return Err(Error::EmptyCell(format!("x = {level}")));
    }
    Ok(v)
}

/// Combines per-covariate-cell moment estimates as
/// `p * delta_1 + (1 - p) * delta_0`, undefined if either cell is.
pub fn mom_covariate_adjusted(
    y: &Sample<f64>,
    pi0: f64,
    pi1: f64,
    sigma: f64,
    p: f64,
) -> Result<EstimateResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    let mut cells = Vec::with_capacity(2);
    for (level, pi) in [(0u8, pi0), (1u8, pi1)] {
        let v = cell(y, level)?;
        if v.len() < 3 {
            return Err(Error::InsufficientData(format!("cell x = {level} has {} observations, need 3", v.len())));
        }
        cells.push(mom_known_var(&Sample::new(v), pi, sigma)?);
    }
    let delta = match (cells[0].delta, cells[1].delta) {
        (Some(d0), Some(d1)) => Some(p * d1 + (1.0 - p) * d0),
        _ => None,
    };
    let mu0 = p * cells[1].mu0 + (1.0 - p) * cells[0].mu0;
    let mu1 = p * cells[1].mu1 + (1.0 - p) * cells[0].mu1;
    let mut notes = Vec::new();
    for (level, c) in cells.iter().enumerate() {
        if c.delta.is_none() {
            notes.push(format!("cell x = {level} is a pile-up"));
        }
    }
    let shape = match delta {
        None => Shape::Unimodal,
        Some(d) => shape_of(d, &[], 0.0, PILEUP_TOL * sigma),
    };
    Ok(EstimateResult {
        kind: EstimatorKind::MomCovariateAdjusted,
        delta,
        mu0,
        mu1,
        sigma0: Some(sigma),
        sigma1: Some(sigma),
        se: None,
        wald_ci: None,
        shape,
        local_optima: vec![],
        loglik: None,
        mean_cov: None,
        cells,
        notes,
    })
}

/// Instrumental-variable ratio `(mean_1 - mean_0) / (pi1 - pi0)` with a
/// delta-method standard error from the two cell means.
pub fn mom_iv(y: &Sample<f64>, pi0: f64, pi1: f64) -> Result<EstimateResult> {
    for pi in [pi0, pi1] {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::Domain(format!("weights must lie in (0, 1), got {pi}")));
        }
    }
    if pi1 == pi0 {
        return Err(Error::WeakInstrument(pi1));
    }
    let (y0, y1) = (cell(y, 0)?, cell(y, 1)?);
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::NAN };
        (m, var / n)
    };
    let (m0, v0) = stats(&y0);
    let (m1, v1) = stats(&y1);
    let dpi = pi1 - pi0;
    let delta = (m1 - m0) / dpi;
    let se = ((v0 + v1).sqrt() / dpi.abs()).max(0.0);
    let se = (se.is_finite() && se > 0.0).then_some(se);
    let mu1 = m0 - pi0 * delta;
    let tol = PILEUP_TOL * ((v0 * y0.len() as f64 + v1 * y1.len() as f64) / 2.0).sqrt();
    Ok(EstimateResult {
        kind: EstimatorKind::MomIv,
        delta: Some(delta),
        mu0: mu1 + delta,
        mu1,
        sigma0: None,
        sigma1: None,
        se,
        wald_ci: se.map(|s| Interval::new(delta - 1.959_963_984_540_054 * s, delta + 1.959_963_984_540_054 * s)),
        shape: shape_of(delta, &[], 0.0, if tol.is_finite() { tol } else { 0.0 }),
        local_optima: vec![],
        loglik: None,
        mean_cov: None,
        cells: vec![],
        notes: vec![],
    })
}
