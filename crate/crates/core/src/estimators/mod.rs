//! Point estimators for the separation and component means, and the
//! pile-up / sign-error classification of their output.

mod mle;
mod mom;

pub use mle::{mle_known_var, mle_unknown_equal_var, mle_unknown_unequal_var, profile_loglik, MleConfig};
pub use mom::{mom_covariate_adjusted, mom_from_cumulants, mom_iv, mom_kappa3, mom_known_var};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative pile-up tolerance: `|delta| < PILEUP_TOL * sigma` counts as zero.
pub const PILEUP_TOL: f64 = 1e-3;

/// Two local optima closer than this in log-likelihood are reported as
/// competing modes.
pub const SECONDARY_MODE_GAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    MleKnownVar,
    MleUnknownEqualVar,
    MleUnknownUnequalVar,
    MomKnownVar,
    MomKappa3,
    MomCovariateAdjusted,
    MomIv,
}

/// Shape of the estimate: a pile-up at zero, a clear nonzero mode, or a
/// nonzero mode with an opposite-sign rival within [`SECONDARY_MODE_GAP`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Unimodal,
    BimodalPrimary,
    BimodalSecondaryNote,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimum {
    pub delta: f64,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub kind: EstimatorKind,
    /// `None` when the estimator is undefined (moment pile-up).
    pub delta: Option<f64>,
    pub mu0: f64,
    pub mu1: f64,
    pub sigma0: Option<f64>,
    pub sigma1: Option<f64>,
    pub se: Option<f64>,
    pub wald_ci: Option<Interval>,
    pub shape: Shape,
    pub local_optima: Vec<LocalOptimum>,
    pub loglik: Option<f64>,
    /// Covariance of `(mu0, mu1)` from the observed information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_cov: Option<[[f64; 2]; 2]>,
    /// Per-cell results for the covariate estimators.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<EstimateResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EstimateResult {
    pub fn is_pileup(&self) -> bool {
        self.shape == Shape::Unimodal
    }

    /// The point estimate, with an undefined estimate read as zero.
    pub fn delta_or_zero(&self) -> f64 {
        self.delta.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pathology {
    Correct,
    PileUp,
    SignError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyLabel {
    pub label: Pathology,
    pub truth_delta: f64,
}

/// Labels an estimate against a known nonzero truth. An undefined estimate
/// or `|delta| < tol` is a pile-up.
pub fn classify_pathology(result: &EstimateResult, truth_delta: f64, tol: f64) -> Result<PathologyLabel> {
    let label = classify_delta(result.delta, truth_delta, tol)?;
    Ok(PathologyLabel { label, truth_delta })
}

pub(crate) fn classify_delta(delta: Option<f64>, truth: f64, tol: f64) -> Result<Pathology> {
    if truth == 0.0 || !truth.is_finite() {
        return Err(Error::Domain("pathology classification needs a nonzero truth".into()));
    }
    Ok(match delta {
        None => Pathology::PileUp,
        Some(d) if d.abs() < tol => Pathology::PileUp,
        Some(d) if d.signum() != truth.signum() => Pathology::SignError,
        Some(_) => Pathology::Correct,
    })
}

/// Shape from the global estimate and the located local optima.
pub(crate) fn shape_of(delta: f64, optima: &[LocalOptimum], best_ll: f64, tol: f64) -> Shape {
    if delta.abs() < tol {
        return Shape::Unimodal;
    }
    let rival = optima.iter().any(|o| {
        o.delta.abs() >= tol && o.delta.signum() != delta.signum() && best_ll - o.loglik < SECONDARY_MODE_GAP
    });
    if rival {
        Shape::BimodalSecondaryNote
    } else {
        Shape::BimodalPrimary
    }
}

pub(crate) fn check_pi(pi: f64) -> Result<()> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::Domain(format!("pi must lie in (0, 1), got {pi}")));
    }
    if pi == 0.5 {
        return Err(Error::SignUnidentifiable(
            "with equal weights the data carry no information about the ordering of the components".into(),
        ));
    }
    Ok(())
}
