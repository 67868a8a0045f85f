//! Pathology forecasts (analytic, bootstrap and Monte Carlo) and the
//! truncation-bias approximation for the moment estimators.

use crate::error::{Error, Result};
use crate::estimators::{classify_delta, mle_known_var, MleConfig, Pathology, PILEUP_TOL};
use crate::mixture::{k_statistics_from_power_sums, MixtureSpec, Sample};
use crate::num::{integrate, normal_cdf, QuadratureConfig, StreamRng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForecastMethod {
    AnalyticNormal,
    MomentBootstrap,
    MonteCarlo,
}

impl ForecastMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AnalyticNormal => "analytic-normal",
            Self::MomentBootstrap => "moment-bootstrap",
            Self::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastInputs {
    pub delta: f64,
    pub pi: f64,
    pub sigma: f64,
    pub n: usize,
}

/// Probabilities of the three estimation outcomes.
///
/// For the analytic and Monte Carlo methods the three probabilities
/// partition. For the bootstrap, `p_signerror` is the marginal frequency of
/// a flipped third k-statistic and `p_correct` the joint frequency of
/// neither event, so they need not sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyForecast {
    pub p_pileup: f64,
    pub p_signerror: f64,
    pub p_correct: f64,
    /// Marginal probability that the third k-statistic has the wrong sign.
    pub p_sign_marginal: f64,
    /// Binomial standard errors of the three frequencies (Monte Carlo only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<[f64; 3]>,
    pub method: ForecastMethod,
    pub inputs: ForecastInputs,
}

fn check_inputs(delta: f64, pi: f64, sigma: f64, n: usize) -> Result<()> {
    if pi == 0.5 {
        return Err(Error::SignUnidentifiable("forecasts need pi != 0.5".into()));
    }
    if !(pi > 0.0 && pi < 1.0) || !(sigma > 0.0) || n < 3 || !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "forecast needs delta >= 0, 0 < pi < 1, sigma > 0, n >= 3 (got {delta}, {pi}, {sigma}, {n})"
        )));
    }
    Ok(())
}

/// `int_{z0}^inf phi(z) g(z) dz` for a standard normal density `phi`.
///
/// The bulk `[-12, 12]` is integrated on a finite range so the adaptive
/// rule always sees the peak; the upper tail goes through the half-line
/// substitution and the lower tail below -12 is negligible.
fn normal_expectation_above<G: Fn(f64) -> f64>(z0: f64, g: G, cfg: &QuadratureConfig) -> Result<f64> {
    const EDGE: f64 = 12.0;
    let f = |z: f64| (-0.5 * z * z).exp() * g(z);
    let mut total = 0.0;
    let lo = z0.max(-EDGE);
    if lo < EDGE {
        total += integrate(f, lo, EDGE, cfg)?;
    }
    total += integrate(f, lo.max(EDGE), f64::INFINITY, cfg)?;
    Ok(total / (2.0 * std::f64::consts::PI).sqrt())
}

/// Normal-approximation forecast from the joint law of `(k2, k3)`.
///
/// Pile-up is `{k2 < sigma^2}`; sign error is `{k2 >= sigma^2}` with `k3`
/// on the wrong side of zero, so the three outcomes partition. The joint
/// probability is an outer adaptive integral over `k2` of the closed-form
/// conditional normal probability for `k3`.
pub fn forecast_analytic(delta: f64, pi: f64, sigma: f64, n: usize) -> Result<PathologyForecast> {
    check_inputs(delta, pi, sigma, n)?;
    let spec = MixtureSpec::zero_mean(pi, delta, sigma)?;
    let law = spec.cumulant_law(n)?;
    let [_, k2, k3] = law.mean;
    let [[v22, v23], [_, v33]] = law.block23();
    let (s2, s3) = (v22.sqrt(), v33.sqrt());
    let z0 = (sigma * sigma - k2) / s2;
    let p_pileup = normal_cdf(z0);
    // Orientation of kappa3 for a positive separation.
    let sgn = if pi < 0.5 { 1.0 } else { -1.0 };
    let p_sign_marginal = normal_cdf(-sgn * k3 / s3);
    let rho = (v23 / (s2 * s3)).clamp(-1.0, 1.0);
    let cond_sd = s3 * (1.0 - rho * rho).max(0.0).sqrt();
    let p_signerror = if cond_sd > 0.0 {
        let cfg = QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 2000 };
        normal_expectation_above(z0, |z| normal_cdf(-sgn * (k3 + v23 / s2 * z) / cond_sd), &cfg)?
    } else {
        // Perfectly correlated: k3 is a deterministic function of k2.
        let z_flip = -k3 / (v23 / s2);
        if sgn * v23 > 0.0 { normal_cdf(z_flip.max(z0)) - normal_cdf(z0) } else { 1.0 - normal_cdf(z_flip.max(z0)) }
    };
    let p_signerror = p_signerror.clamp(0.0, 1.0 - p_pileup);
    Ok(PathologyForecast {
        p_pileup,
        p_signerror,
        p_correct: (1.0 - p_pileup - p_signerror).clamp(0.0, 1.0),
        p_sign_marginal,
        se: None,
        method: ForecastMethod::AnalyticNormal,
        inputs: ForecastInputs { delta, pi, sigma, n },
    })
}

/// Default number of bootstrap resamples.
pub const DEFAULT_BOOTSTRAP: usize = 2000;

/// Case-resampling bootstrap of the k-statistics. Resample `b` draws from
/// stream `rng.fork(b)`, so results do not depend on thread layout.
pub fn forecast_bootstrap(y: &Sample<f64>, pi: f64, sigma: f64, b: usize, rng: &StreamRng) -> Result<PathologyForecast> {
    if b < 200 {
        return Err(Error::Domain(format!("bootstrap needs B >= 200, got {b}")));
    }
    let k = y.cumulants()?;
    let n = y.len();
    let c = k.k1;
    let data: Vec<f64> = y.y.iter().map(|v| v - c).collect();
    let s2 = sigma * sigma;
    let flags: Vec<(bool, bool)> = (0..b as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.fork(i);
            let (mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0);
            for _ in 0..n {
                let v = data[r.random_range(0..n)];
                a1 += v;
                a2 += v * v;
                a3 += v * v * v;
            }
            let kb = k_statistics_from_power_sums(n, c, a1, a2, a3);
            let flip = (kb.k3 > 0.0) != (k.k3 > 0.0) || (kb.k3 == 0.0) != (k.k3 == 0.0);
            (kb.k2 < s2, flip)
        })
        .collect();
    let bf = b as f64;
    let pile = flags.iter().filter(|f| f.0).count() as f64 / bf;
    let flip = flags.iter().filter(|f| f.1).count() as f64 / bf;
    let correct = flags.iter().filter(|f| !f.0 && !f.1).count() as f64 / bf;
    Ok(PathologyForecast {
        p_pileup: pile,
        p_signerror: flip,
        p_correct: correct,
        p_sign_marginal: flip,
        se: None,
        method: ForecastMethod::MomentBootstrap,
        inputs: ForecastInputs { delta: f64::NAN, pi, sigma, n },
    })
}

/// Empirical pathology frequencies of the known-variance MLE over `reps`
/// simulated data sets; replicate `r` draws from `rng.fork(r)`.
pub fn forecast_monte_carlo(spec: &MixtureSpec<f64>, n: usize, reps: usize, rng: &StreamRng) -> Result<PathologyForecast> {
    if reps < 100 {
        return Err(Error::Domain(format!("Monte Carlo forecast needs reps >= 100, got {reps}")));
    }
    spec.validate()?;
    let truth = spec.delta();
    if truth == 0.0 {
        return Err(Error::Domain("pathology frequencies need a nonzero true separation".into()));
    }
    let cfg = MleConfig::default();
    let labels: Vec<Result<Pathology>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.fork(r);
            let y = spec.sample(n, &mut g)?;
            let e = mle_known_var(&y, spec.pi, spec.sigma0, &cfg)?;
            classify_delta(e.delta, truth, PILEUP_TOL * spec.sigma0)
        })
        .collect();
    let labels: Vec<Pathology> = labels.into_iter().collect::<Result<_>>()?;
    let freq = |p: Pathology| labels.iter().filter(|&&l| l == p).count() as f64 / reps as f64;
    let (c, pu, se) = (freq(Pathology::Correct), freq(Pathology::PileUp), freq(Pathology::SignError));
    let bse = |p: f64| (p * (1.0 - p) / reps as f64).sqrt();
    let (pi, sigma) = (spec.pi, spec.sigma0);
    Ok(PathologyForecast {
        p_pileup: pu,
        p_signerror: se,
        p_correct: c,
        p_sign_marginal: f64::NAN,
        se: Some([bse(pu), bse(se), bse(c)]),
        method: ForecastMethod::MonteCarlo,
        inputs: ForecastInputs { delta: truth.abs(), pi, sigma, n },
    })
}

/// Writes forecasts as `delta,n,p_pileup,p_signerror,p_correct,method`.
pub fn write_forecast_csv<W: Write>(rows: &[PathologyForecast], mut w: W) -> Result<()> {
    writeln!(w, "delta,n,p_pileup,p_signerror,p_correct,method")?;
    for f in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            f.inputs.delta,
            f.inputs.n,
            f.p_pileup,
            f.p_signerror,
            f.p_correct,
            f.method.as_str()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasEstimator {
    MomKnownVar,
    MomKappa3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub n_grid: Vec<usize>,
    /// Mean of the estimate conditional on the non-pathological region.
    pub conditional_mean: Vec<f64>,
    /// Probability of that region under the normal approximation.
    pub region_probability: Vec<f64>,
    pub estimator: BiasEstimator,
}

/// Truncated-normal mean of the moment estimator under the normal
/// approximation to its driving k-statistic.
///
/// `MomKnownVar`: `E[sqrt((K2 - sigma^2) / q) | K2 > sigma^2]`;
/// `MomKappa3`: `E[cbrt(K3 / (q (1 - 2 pi))) | K3 (1 - 2 pi) > 0]`.
pub fn conditional_bias_mom(
    delta: f64,
    pi: f64,
    sigma: f64,
    n_grid: &[usize],
    estimator: BiasEstimator,
    cfg: &QuadratureConfig,
) -> Result<BiasCurve> {
    if !(delta > 0.0) {
        return Err(Error::Domain("conditional bias needs delta > 0".into()));
    }
    let q = pi * (1.0 - pi);
    let r = 1.0 - 2.0 * pi;
    let mut means = Vec::with_capacity(n_grid.len());
    let mut probs = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        check_inputs(delta, pi, sigma, n)?;
        let law = MixtureSpec::zero_mean(pi, delta, sigma)?.cumulant_law(n)?;
        let (center, sd, lower, g): (f64, f64, f64, Box<dyn Fn(f64) -> f64>) = match estimator {
            BiasEstimator::MomKnownVar => (
                law.mean[1],
                law.covariance[1][1].sqrt(),
                sigma * sigma,
                Box::new(move |k: f64| ((k - sigma * sigma).max(0.0) / q).sqrt()),
            ),
            BiasEstimator::MomKappa3 => {
                // Work with K3 (1 - 2 pi), positive for a positive separation.
                (law.mean[2] * r, law.covariance[2][2].sqrt() * r.abs(), 0.0, Box::new(move |k: f64| (k / (q * r * r)).max(0.0).cbrt()))
            }
        };
        let z0 = (lower - center) / sd;
        let tail = 1.0 - normal_cdf(z0);
        if !(tail > 0.0) {
            return Err(Error::Domain(format!("truncation region has zero probability at n = {n}")));
        }
        let num = normal_expectation_above(z0, |z| g(center + sd * z), cfg)?;
        means.push(num / tail);
        probs.push(tail);
    }
    Ok(BiasCurve { n_grid: n_grid.to_vec(), conditional_mean: means, region_probability: probs, estimator })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_value_is_one_half() {
        let f = forecast_analytic(0.0, 0.325, 1.0, 200).unwrap();
        assert_eq!(f.p_pileup, 0.5);
    }

    #[test]
    fn separation_limit() {
        let f = forecast_analytic(3.0, 0.325, 1.0, 2000).unwrap();
        assert!(f.p_pileup < 1e-6 && f.p_signerror < 1e-6 && f.p_correct > 1.0 - 1e-5);
    }

    #[test]
    fn partition_sums_to_one() {
        for &d in &[0.1, 0.5, 1.0] {
            let f = forecast_analytic(d, 0.2, 1.0, 500).unwrap();
            assert!((f.p_pileup + f.p_signerror + f.p_correct - 1.0).abs() < 1e-12);
            assert!(f.p_signerror <= f.p_sign_marginal + 1e-12);
        }
    }

    #[test]
    fn mirrored_weight_gives_same_forecast() {
        let a = forecast_analytic(0.6, 0.3, 1.0, 400).unwrap();
        let b = forecast_analytic(0.6, 0.7, 1.0, 400).unwrap();
        assert!((a.p_pileup - b.p_pileup).abs() < 1e-12);
        assert!((a.p_signerror - b.p_signerror).abs() < 1e-9);
    }

    #[test]
    fn rejects_equal_weights() {
        assert!(matches!(forecast_analytic(0.5, 0.5, 1.0, 100), Err(Error::SignUnidentifiable(_))));
    }

    #[test]
    fn bias_curve_limits() {
        let cfg = QuadratureConfig::default();
        let c = conditional_bias_mom(0.25, 0.325, 1.0, &[100, 1_000_000_000], BiasEstimator::MomKnownVar, &cfg).unwrap();
        assert!(c.conditional_mean[0] > 0.25);
        assert!((c.conditional_mean[1] - 0.25).abs() < 1e-3, "{:?}", c);
    }
}
