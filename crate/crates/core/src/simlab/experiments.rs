use crate::error::{Error, Result};
use crate::estimators::{classify_delta, mle_known_var, MleConfig, Pathology, PILEUP_TOL};
use crate::inference::grid_bootstrap_pvalue;
use crate::mixture::{sample_cumulants, CumulantEstimates, MixtureSpec, Sample};
use crate::num::{maximize_1d, StreamRng};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{index, Generator};

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let (i, f) = (h.floor() as usize, h.fract());
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub delta_n: f64,
    /// Quantiles (10%, 50%, 90%) of `n^(1/4) |est - delta_n|`.
    pub quarter: [f64; 3],
    /// Quantiles (10%, 50%, 90%) of `n^(1/2) |est - delta_n|`.
    pub half: [f64; 3],
    /// Medians of `|n^(-1/2) sum A_i|`, the same for `B` and `C`.
    pub abc: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub exponent: f64,
    pub scale: f64,
    pub pi: f64,
    pub reps: usize,
    pub rows: Vec<RateRow>,
}

/// One-parameter local model `pi N(-t, 1) + (1 - pi) N(c t, 1)` with
/// `c = pi / (1 - pi)`: its mean is zero for every `t`.
fn local_loglik(y: &[f64], pi: f64, t: f64) -> f64 {
    let c = pi / (1.0 - pi);
    let (lp, lq) = (pi.ln(), (1.0 - pi).ln());
    y.iter()
        .map(|&v| {
            let a = lp - 0.5 * (v + t) * (v + t);
            let b = lq - 0.5 * (v - c * t) * (v - c * t);
            let m = a.max(b);
            m + ((a - m).exp() + (b - m).exp()).ln()
        })
        .sum()
}

/// Scaled estimation error in the local model with `delta_n = scale *
/// n^(-exponent)`. An exponent above 1/4 is the shrinking-separation regime
/// of the rate theorem; exponent 0 is the regular fixed-separation case.
pub fn rate_experiment(exponent: f64, scale: f64, pi: f64, n_grid: &[usize], reps: usize, seed: u64) -> Result<RateTable> {
    if !(exponent == 0.0 || exponent > 0.25) {
        return Err(Error::Domain(format!("exponent must be 0 or exceed 1/4, got {exponent}")));
    }
    if !(pi > 0.0 && pi < 1.0) || !(scale > 0.0) || reps == 0 {
        return Err(Error::Domain("need 0 < pi < 1, scale > 0 and reps > 0".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid.first().is_none_or(|&n| n < 10) {
        return Err(Error::Domain("n grid must be increasing and start at 10 or more".into()));
    }
    let c = pi / (1.0 - pi);
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let dn = scale * (n as f64).powf(-exponent);
        let bound = 2.0_f64.max(3.0 * dn);
        let draws = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = StreamRng::keyed(seed, &[gi as u64, r as u64]);
                let y: Vec<f64> = (0..n)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        if rng.random::<f64>() < pi {
                            z - dn
                        } else {
                            z + c * dn
                        }
                    })
                    .collect();
                let (t, _) = maximize_1d(|t| local_loglik(&y, pi, t), -bound, bound, 1e-9)?;
                let mut abc = [0.0; 3];
                for &v in &y {
                    let v2 = v * v;
                    abc[0] += v2 - 1.0;
                    abc[1] += -3.0 * v + v2 * v;
                    abc[2] += 3.0 - 6.0 * v2 + v2 * v2;
                }
                let rt = (n as f64).sqrt();
                Ok(((t - dn).abs(), abc.map(|a| (a / rt).abs())))
            })
            .collect::<Result<Vec<(f64, [f64; 3])>>>()?;
        let err = sorted(draws.iter().map(|d| d.0).collect());
        let q = |s: f64| [0.1, 0.5, 0.9].map(|p| s * quantile(&err, p));
        let abc = [0, 1, 2].map(|k| quantile(&sorted(draws.iter().map(|d| d.1[k]).collect()), 0.5));
        rows.push(RateRow {
            n,
            delta_n: dn,
            quarter: q((n as f64).powf(0.25)),
            half: q((n as f64).sqrt()),
            abc,
        });
    }
    Ok(RateTable { exponent, scale, pi, reps, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorGrid {
    pub pis: Vec<f64>,
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub pi: f64,
    pub delta: f64,
    pub n: usize,
    pub reps: usize,
    /// Share of replicates where `k2 < sigma^2` agrees with an MLE pile-up.
    pub pileup_agreement: f64,
    /// Share where `sgn(k3) != sgn(kappa3)` agrees with an MLE sign error.
    pub sign_agreement: f64,
    pub mle_pileup: f64,
    pub mle_signerror: f64,
}

/// Agreement between the moment indicators and the MLE pathologies.
pub fn validate_mom_indicators(grid: &IndicatorGrid, reps: usize, seed: u64) -> Result<Vec<IndicatorRow>> {
    if reps == 0 || !(grid.sigma > 0.0) {
        return Err(Error::Domain("need reps > 0 and sigma > 0".into()));
    }
    let mut cells = Vec::new();
    for &pi in &grid.pis {
        for &d in &grid.deltas {
            for &n in &grid.ns {
                cells.push((pi, d, n, MixtureSpec::zero_mean(pi, d, grid.sigma)?));
            }
        }
    }
    let cfg = MleConfig::default();
    let tol = PILEUP_TOL * grid.sigma;
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let out = jobs
        .into_par_iter()
        .map(|(c, r)| {
            let (pi, d, n, spec) = cells[c];
            let y = spec.sample(n, &mut StreamRng::keyed(seed, &[c as u64, r as u64]))?;
            let k = y.cumulants()?;
            let fit = mle_known_var(&y, pi, grid.sigma, &cfg)?;
            let label = classify_delta(fit.delta, d, tol)?;
            let ind_pile = k.k2 < grid.sigma * grid.sigma;
            let kappa3_sign = ((1.0 - 2.0 * pi) * d).signum();
            let ind_sign = k.k3.signum() != kappa3_sign;
            Ok([
                (ind_pile == (label == Pathology::PileUp)) as u8,
                (ind_sign == (label == Pathology::SignError)) as u8,
                (label == Pathology::PileUp) as u8,
                (label == Pathology::SignError) as u8,
            ])
        })
        .collect::<Result<Vec<[u8; 4]>>>()?;
    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, &(pi, delta, n, _))| {
            let mut s = [0usize; 4];
            for v in &out[c * reps..(c + 1) * reps] {
                for k in 0..4 {
                    s[k] += v[k] as usize;
                }
            }
            let f = |k: usize| s[k] as f64 / reps as f64;
            IndicatorRow {
                pi,
                delta,
                n,
                reps,
                pileup_agreement: f(0),
                sign_agreement: f(1),
                mle_pileup: f(2),
                mle_signerror: f(3),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisspecRow {
    /// `None` for normal components.
    pub df: Option<f64>,
    pub ok: usize,
    pub coverage: f64,
    pub se: f64,
}

/// Grid-bootstrap coverage of the true separation when the components are
/// scaled t distributions but the working model is normal.
#[allow(clippy::too_many_arguments)]
pub fn misspecification_study(
    dfs: &[Option<f64>],
    spec: &MixtureSpec<f64>,
    n: usize,
    reps: usize,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<Vec<MisspecRow>> {
    spec.validate()?;
    if !spec.is_homoskedastic() {
        return Err(Error::UnsupportedModel("misspecification study assumes equal component SDs".into()));
    }
    let gens = dfs
        .iter()
        .map(|df| {
            let g = match df {
                None => Generator::Gaussian { spec: *spec },
                Some(df) if *df >= 3.0 => Generator::TMixture { df: *df, spec: *spec },
                Some(df) => return Err(Error::Domain(format!("df must be at least 3, got {df}"))),
            };
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = spec.delta();
    let mut rows = Vec::with_capacity(dfs.len());
    for (gi, g) in gens.iter().enumerate() {
        let cov: Vec<Option<bool>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let key = |k: u64| StreamRng::keyed(seed, &[gi as u64, r as u64, k]);
                let y = g.sample(n, &mut key(0)).ok()?;
                let k = y.cumulants().ok()?;
                grid_bootstrap_pvalue(&k, spec.pi, truth, spec.sigma0, b, &key(1)).ok().map(|p| p > alpha)
            })
            .collect();
        let ok: Vec<bool> = cov.into_iter().flatten().collect();
        let c = ok.iter().filter(|&&v| v).count() as f64 / ok.len() as f64;
        rows.push(MisspecRow { df: dfs[gi], ok: ok.len(), coverage: c, se: (c * (1.0 - c) / ok.len() as f64).sqrt() });
    }
    Ok(rows)
}

/// Joint pathology frequencies of the per-covariate-cell MLEs. Rows index
/// the `x = 0` cell and columns the `x = 1` cell, both in the order
/// correct, pile-up, sign error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub counts: [[usize; 3]; 3],
    pub freq: [[f64; 3]; 3],
    pub ok: usize,
    pub failed: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn covariate_joint_table(
    n: [usize; 2],
    pi: [f64; 2],
    delta: [f64; 2],
    sigma: f64,
    reps: usize,
    seed: u64,
) -> Result<JointTable> {
    let specs = [MixtureSpec::zero_mean(pi[0], delta[0], sigma)?, MixtureSpec::zero_mean(pi[1], delta[1], sigma)?];
    let cfg = MleConfig::default();
    let tol = PILEUP_TOL * sigma;
    let labels: Vec<Option<[Pathology; 2]>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut out = [Pathology::Correct; 2];
            for x in 0..2 {
                let y = specs[x].sample(n[x], &mut StreamRng::keyed(seed, &[r as u64, x as u64])).ok()?;
                let fit = mle_known_var(&y, pi[x], sigma, &cfg).ok()?;
                out[x] = classify_delta(fit.delta, delta[x], tol).ok()?;
            }
            Some(out)
        })
        .collect();
    let mut counts = [[0usize; 3]; 3];
    let mut ok = 0;
    for l in labels.iter().flatten() {
        counts[index(l[0])][index(l[1])] += 1;
        ok += 1;
    }
    let freq = counts.map(|row| row.map(|c| c as f64 / ok.max(1) as f64));
    Ok(JointTable { counts, freq, ok, failed: reps - ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMagnitude {
    pub n: usize,
    pub count: usize,
    /// Mean of `|est|` over replicates with `k2 > sigma^2`.
    pub mean_abs: Option<f64>,
    pub se: Option<f64>,
}

/// Monte Carlo mean of the MLE magnitude on the event `k2 > sigma^2`, the
/// region where the known-variance moment estimator is defined.
pub fn conditional_mle_magnitude(spec: &MixtureSpec<f64>, n: usize, reps: usize, seed: u64) -> Result<ConditionalMagnitude> {
    let cfg = MleConfig::default();
    let s = spec.sigma0;
    let vals = (0..reps)
        .into_par_iter()
        .map(|r| {
            let y = spec.sample(n, &mut StreamRng::keyed(seed, &[n as u64, r as u64]))?;
            if y.cumulants()?.k2 <= s * s {
                return Ok(None);
            }
            Ok(Some(mle_known_var(&y, spec.pi, s, &cfg)?.delta_or_zero().abs()))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let v: Vec<f64> = vals.into_iter().flatten().collect();
    let count = v.len();
    if count < 2 {
        return Ok(ConditionalMagnitude { n, count, mean_abs: None, se: None });
    }
    let m = v.iter().sum::<f64>() / count as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (count - 1) as f64;
    Ok(ConditionalMagnitude { n, count, mean_abs: Some(m), se: Some((var / count as f64).sqrt()) })
}

/// k-statistics of `b` case resamples; resample `i` uses `rng.fork(i)`.
pub fn bootstrap_cumulants(y: &Sample<f64>, b: usize, rng: &StreamRng) -> Result<Vec<CumulantEstimates<f64>>> {
    let n = y.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 observations, got {n}")));
    }
    (0..b as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng.fork(i);
            let v: Vec<f64> = (0..n).map(|_| y.y[g.random_range(0..n)]).collect();
            sample_cumulants(&v)
        })
        .collect()
}
