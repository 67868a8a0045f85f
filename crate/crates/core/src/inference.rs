//! Confidence sets by test inversion: Wald statistics built on the joint
//! law of the k-statistics, the grid bootstrap, one- and two-dimensional
//! sets, a Hodges-Lehmann style point, and the Berger-Boos supremum over a
//! nuisance region.

use crate::error::{Error, Result};
use crate::estimators::Interval;
use crate::mixture::{CumulantEstimates, MixtureSpec, Sample};
use crate::num::{chi2_sf, linalg, StreamRng};
use crate::num::rng::hash_keys;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default grid-bootstrap replicates.
pub const DEFAULT_B: usize = 2000;
/// Default Berger-Boos nuisance budget.
pub const DEFAULT_GAMMA: f64 = 0.001;
/// Default Berger-Boos lattice points per axis.
pub const DEFAULT_LATTICE: usize = 15;

/// Uniform grid `lo, lo + h, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        let g = Self { lo, hi, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() || self.points < 3 {
            return Err(Error::Config(format!(
                "grid needs finite lo < hi and at least 3 points (got {}, {}, {})",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64;
                (self.lo * (m - t) + self.hi * t) / m
            })
            .collect()
    }

    /// Default separation grid: `+-4 max(sqrt(k2), sigma) / sqrt(pi (1 - pi))`
    /// with 161 points.
    pub fn default_delta(k: &CumulantEstimates<f64>, pi: f64, sigma: f64) -> Self {
        let half = 4.0 * k.k2.max(0.0).sqrt().max(sigma) / (pi * (1.0 - pi)).sqrt();
        Self { lo: -half, hi: half, points: 161 }
    }

    /// Default mean axis: `k1 +- 2.5 max(sqrt(k2), sigma)` with 101 points.
    pub fn default_mean_axis(k: &CumulantEstimates<f64>, sigma: f64) -> Self {
        let half = 2.5 * k.k2.max(0.0).sqrt().max(sigma);
        Self { lo: k.k1 - half, hi: k.k1 + half, points: 101 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2d {
    pub mu0: GridSpec,
    pub mu1: GridSpec,
}

fn check_weight(pi: f64) -> Result<()> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::Domain(format!("pi must lie in (0, 1), got {pi}")));
    }
    if pi == 0.5 {
        return Err(Error::SignUnidentifiable("separation tests need pi != 0.5".into()));
    }
    Ok(())
}

/// Inverse of a symmetric positive definite 3x3 matrix.
pub fn invert_sym3(a: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    linalg::inverse_spd(a).ok_or_else(|| Error::Singular("3x3 covariance is not positive definite".into()))
}

/// Wald statistic on `(k2, k3)` against the null mixture; approximately
/// chi-square with 2 degrees of freedom.
pub fn wald_stat_2(khat: &CumulantEstimates<f64>, null: &MixtureSpec<f64>) -> Result<f64> {
    check_weight(null.pi)?;
    let law = null.cumulant_law(khat.n)?;
    let d = [khat.k2 - law.mean[1], khat.k3 - law.mean[2]];
    linalg::quad_form_inv(&law.block23(), &d)
        .ok_or_else(|| Error::Singular("covariance of (k2, k3) is not positive definite".into()))
}

/// Wald statistic on `(k1, k2, k3)`; approximately chi-square with 3
/// degrees of freedom when `mu0 != mu1`.
pub fn wald_stat_3(khat: &CumulantEstimates<f64>, null: &MixtureSpec<f64>) -> Result<f64> {
    check_weight(null.pi)?;
    if null.mu0 == null.mu1 {
        return Err(Error::Degenerate("the chi-square reference fails at mu0 == mu1".into()));
    }
    let law = null.cumulant_law(khat.n)?;
    let d = [khat.k1 - law.mean[0], khat.k2 - law.mean[1], khat.k3 - law.mean[2]];
    linalg::quad_form_inv(&law.covariance, &d)
        .ok_or_else(|| Error::Singular("covariance of (k1, k2, k3) is not positive definite".into()))
}

/// One-dimensional confidence set over a separation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub alpha: f64,
    /// Maximal runs of accepted grid points, sorted and disjoint.
    pub accepted: Vec<Interval>,
    /// Point estimate: midpoint of the highest p-value plateau.
    pub hl_point: Option<f64>,
    pub hl_plateau: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ConfidenceSet {
    pub fn from_p_values(grid: Vec<f64>, p_values: Vec<f64>, alpha: f64) -> Self {
        let keep: Vec<bool> = p_values.iter().map(|&p| p > alpha).collect();
        let accepted = runs(&grid, &keep);
        let (hl_point, hl_plateau) = hodges_lehmann(&grid, &p_values);
        let warning = if accepted.is_empty() {
            Some("every grid point is rejected; the two-component normal mixture may fit the data poorly".to_string())
        } else if keep.first() == Some(&true) || keep.last() == Some(&true) {
            Some("the accepted set reaches the edge of the grid; widen the grid".to_string())
        } else {
            None
        };
        Self { grid, p_values, alpha, accepted, hl_point, hl_plateau, warning }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.accepted.iter().any(|i| i.contains(x))
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval::new(self.accepted.first()?.lo, self.accepted.last()?.hi))
    }
}

/// Maximal runs of flagged grid points as closed intervals.
pub(crate) fn runs(grid: &[f64], keep: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &k) in keep.iter().enumerate() {
        match (k, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Interval::new(grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Interval::new(grid[s], grid[keep.len() - 1]));
    }
    out
}

/// Midpoint of the widest run of grid points attaining the maximum
/// p-value; equal widths go to the rightmost run.
fn hodges_lehmann(grid: &[f64], p: &[f64]) -> (Option<f64>, Option<Interval>) {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return (None, None);
    }
    let keep: Vec<bool> = p.iter().map(|&v| v == max).collect();
    let best = runs(grid, &keep)
        .into_iter()
        .reduce(|a, b| if b.width() >= a.width() { b } else { a });
    match best {
        Some(iv) => (Some(0.5 * (iv.lo + iv.hi)), Some(iv)),
        None => (None, None),
    }
}

/// Wald test inversion over the separation grid with chi-square(2)
/// p-values. Depends on the data only through `(k2, k3)`.
pub fn wald_invert_1d(y: &Sample<f64>, pi: f64, sigma: f64, grid: &GridSpec, alpha: f64) -> Result<ConfidenceSet> {
    grid.validate()?;
    check_alpha(alpha)?;
    let k = y.cumulants()?;
    wald_invert_1d_from(&k, pi, sigma, grid, alpha)
}

pub fn wald_invert_1d_from(
    k: &CumulantEstimates<f64>,
    pi: f64,
    sigma: f64,
    grid: &GridSpec,
    alpha: f64,
) -> Result<ConfidenceSet> {
    check_weight(pi)?;
    let pts = grid.values();
    let p = pts
        .iter()
        .map(|&d| wald_pvalue_2(k, pi, d, sigma))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConfidenceSet::from_p_values(pts, p, alpha))
}

/// Chi-square(2) p-value of the separation `delta`.
pub fn wald_pvalue_2(k: &CumulantEstimates<f64>, pi: f64, delta: f64, sigma: f64) -> Result<f64> {
    let t = wald_stat_2(k, &MixtureSpec::zero_mean(pi, delta, sigma)?)?;
    chi2_sf(t, 2)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Grid-bootstrap p-value of one separation: the statistic is recomputed
/// on `b` data sets simulated from the mean-zero null mixture, and
/// `p = (1 + #{t* >= t}) / (b + 1)`. Replicate `r` uses `rng.fork(r)`.
pub fn grid_bootstrap_pvalue(
    k: &CumulantEstimates<f64>,
    pi: f64,
    delta: f64,
    sigma: f64,
    b: usize,
    rng: &StreamRng,
) -> Result<f64> {
    let null = MixtureSpec::zero_mean(pi, delta, sigma)?;
    let t_obs = wald_stat_2(k, &null)?;
    let law = null.cumulant_law(k.n)?;
    let cov = law.block23();
    let inv = linalg::inverse_spd(&cov).ok_or_else(|| Error::Singular("covariance of (k2, k3) is singular".into()))?;
    let mut exceed = 0usize;
    for r in 0..b as u64 {
        let mut g = rng.fork(r);
        let ks = null.simulate_cumulants(k.n, &mut g)?;
        let d = [ks.k2 - law.mean[1], ks.k3 - law.mean[2]];
        let t = d[0] * d[0] * inv[0][0] + 2.0 * d[0] * d[1] * inv[0][1] + d[1] * d[1] * inv[1][1];
        if t >= t_obs {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (b + 1) as f64)
}

/// Grid-bootstrap confidence set. Grid point `j` draws its null data sets
/// from `rng.fork(j)`, so the set is independent of scheduling.
pub fn grid_bootstrap_1d(
    y: &Sample<f64>,
    pi: f64,
    sigma: f64,
    grid: &GridSpec,
    b: usize,
    alpha: f64,
    rng: &StreamRng,
) -> Result<ConfidenceSet> {
    grid.validate()?;
    check_alpha(alpha)?;
    check_weight(pi)?;
    if b < 199 {
        return Err(Error::Domain(format!("grid bootstrap needs B >= 199, got {b}")));
    }
    // Centring is immaterial: the statistic uses only k2 and k3.
    let k = y.cumulants()?;
    let pts = grid.values();
    let p = pts
        .par_iter()
        .enumerate()
        .map(|(j, &d)| grid_bootstrap_pvalue(&k, pi, d, sigma, b, &rng.fork(j as u64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConfidenceSet::from_p_values(pts, p, alpha))
}

/// Two-dimensional confidence set for `(mu0, mu1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet2d {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Row-major over `(mu0, mu1)`; `None` on the degenerate diagonal.
    pub p_values: Vec<Option<f64>>,
    pub mask: Vec<bool>,
    pub alpha: f64,
    pub mu0_projection: Vec<Interval>,
    pub mu1_projection: Vec<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ConfidenceSet2d {
    pub fn p_value(&self, i: usize, j: usize) -> Option<f64> {
        self.p_values[i * self.mu1.len() + j]
    }

    pub fn accepted(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.mu1.len() + j]
    }

    /// Writes `mu0,mu1,p` rows; degenerate cells have an empty `p`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "mu0,mu1,p")?;
        for (i, a) in self.mu0.iter().enumerate() {
            for (j, b) in self.mu1.iter().enumerate() {
                match self.p_value(i, j) {
                    Some(p) => writeln!(w, "{a},{b},{}", Sci(p))?,
                    None => writeln!(w, "{a},{b},")?,
                }
            }
        }
        Ok(())
    }
}

/// Wald test inversion over a `(mu0, mu1)` grid with chi-square(3)
/// p-values. Cells on the diagonal `mu0 == mu1` are left out of the mask.
pub fn wald_invert_2d(y: &Sample<f64>, pi: f64, sigma: f64, grid: &Grid2d, alpha: f64) -> Result<ConfidenceSet2d> {
    grid.mu0.validate()?;
    grid.mu1.validate()?;
    check_alpha(alpha)?;
    check_weight(pi)?;
    let k = y.cumulants()?;
    let (a, b) = (grid.mu0.values(), grid.mu1.values());
    let scale = (grid.mu0.hi - grid.mu0.lo).max(grid.mu1.hi - grid.mu1.lo);
    let mut p_values = Vec::with_capacity(a.len() * b.len());
    for &m0 in &a {
        for &m1 in &b {
            let p = if (m0 - m1).abs() <= 1e-12 * scale {
                None
            } else {
                let null = MixtureSpec::homoskedastic(pi, m0, m1, sigma)?;
                match wald_stat_3(&k, &null) {
                    Ok(t) => Some(chi2_sf(t, 3)?),
                    Err(Error::Singular(_)) | Err(Error::Degenerate(_)) => None,
                    Err(e) => return Err(e),
                }
            };
            p_values.push(p);
        }
    }
    let mask: Vec<bool> = p_values.iter().map(|p| p.is_some_and(|v| v > alpha)).collect();
    let nb = b.len();
    let row_any: Vec<bool> = (0..a.len()).map(|i| (0..nb).any(|j| mask[i * nb + j])).collect();
    let col_any: Vec<bool> = (0..nb).map(|j| (0..a.len()).any(|i| mask[i * nb + j])).collect();
    let warning = (!mask.iter().any(|&m| m)).then(|| {
        "every grid point is rejected; the two-component normal mixture may fit the data poorly".to_string()
    });
    Ok(ConfidenceSet2d {
        mu0_projection: runs(&a, &row_any),
        mu1_projection: runs(&b, &col_any),
        mu0: a,
        mu1: b,
        p_values,
        mask,
        alpha,
        warning,
    })
}

/// Nuisance region for `(pi, sigma^2)`: an ellipse from bootstrap draws
/// whose radius is the `1 - gamma` quantile of their Mahalanobis distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceRegion {
    pub center: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Squared Mahalanobis radius.
    pub radius2: f64,
}

impl NuisanceRegion {
    /// A single known point.
    pub fn point(pi: f64, sigma2: f64) -> Self {
        Self { center: [pi, sigma2], covariance: [[0.0; 2]; 2], radius2: 0.0 }
    }

    pub fn from_draws(draws: &[[f64; 2]], gamma: f64) -> Result<Self> {
        if draws.len() < 2 {
            return Err(Error::InsufficientData("nuisance region needs bootstrap draws".into()));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        let n = draws.len() as f64;
        let mut c = [0.0; 2];
        for d in draws {
            c[0] += d[0] / n;
            c[1] += d[1] / n;
        }
        let mut cov = [[0.0; 2]; 2];
        for d in draws {
            let e = [d[0] - c[0], d[1] - c[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += e[i] * e[j] / (n - 1.0);
                }
            }
        }
        let inv = linalg::inverse_spd(&cov).ok_or_else(|| Error::Singular("bootstrap nuisance draws are degenerate".into()))?;
        let mut dist: Vec<f64> = draws
            .iter()
            .map(|d| {
                let e = [d[0] - c[0], d[1] - c[1]];
                e[0] * e[0] * inv[0][0] + 2.0 * e[0] * e[1] * inv[0][1] + e[1] * e[1] * inv[1][1]
            })
            .collect();
        dist.sort_by(f64::total_cmp);
        let idx = (((1.0 - gamma) * n).ceil() as usize).clamp(1, draws.len()) - 1;
        Ok(Self { center: c, covariance: cov, radius2: dist[idx] })
    }

    pub fn is_point(&self) -> bool {
        self.radius2 == 0.0
    }

    /// `m x m` lattice over the bounding box, keeping points inside the
    /// ellipse. A single point for a degenerate region.
    pub fn lattice(&self, m: usize) -> Vec<[f64; 2]> {
        if self.is_point() || m < 2 {
            return vec![self.center];
        }
        let r = self.radius2.sqrt();
        let half = [r * self.covariance[0][0].sqrt(), r * self.covariance[1][1].sqrt()];
        let inv = linalg::inverse_spd(&self.covariance);
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let u = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
                let v = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
                let e = [u * half[0], v * half[1]];
                let inside = match inv {
                    Some(a) => e[0] * e[0] * a[0][0] + 2.0 * e[0] * e[1] * a[0][1] + e[1] * e[1] * a[1][1] <= self.radius2 * (1.0 + 1e-12),
                    None => true,
                };
                if inside {
                    out.push([self.center[0] + e[0], self.center[1] + e[1]]);
                }
            }
        }
        if out.is_empty() {
            out.push(self.center);
        }
        out
    }
}

/// Berger-Boos p-value of `delta0` over explicit nuisance points
/// `(pi, sigma^2)`: the largest grid-bootstrap p-value plus `gamma`,
/// capped at one. The bootstrap stream at each point is keyed by its
/// coordinates, so adding points can only raise the result.
pub fn berger_boos_pvalue_at(
    y: &Sample<f64>,
    delta0: f64,
    points: &[[f64; 2]],
    gamma: f64,
    b: usize,
    rng: &StreamRng,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("empty nuisance region".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let k = y.cumulants()?;
    let ps = points
        .par_iter()
        .filter(|p| p[0] > 0.0 && p[0] < 1.0 && p[0] != 0.5 && p[1] > 0.0)
        .map(|p| {
            let key = hash_keys(&[rng.stream(), p[0].to_bits(), p[1].to_bits(), delta0.to_bits()]);
            let g = StreamRng::new(rng.seed(), key);
            grid_bootstrap_pvalue(&k, p[0], delta0, p[1].sqrt(), b, &g)
        })
        .collect::<Result<Vec<f64>>>()?;
    if ps.is_empty() {
        return Err(Error::Domain("no admissible nuisance point (need 0 < pi < 1, pi != 0.5, sigma^2 > 0)".into()));
    }
    let sup = ps.into_iter().fold(0.0, f64::max);
    Ok((sup + gamma).min(1.0))
}

/// Berger-Boos p-value over the default lattice of `region`.
pub fn berger_boos_pvalue(
    y: &Sample<f64>,
    delta0: f64,
    region: &NuisanceRegion,
    lattice: usize,
    gamma: f64,
    b: usize,
    rng: &StreamRng,
) -> Result<f64> {
    berger_boos_pvalue_at(y, delta0, &region.lattice(lattice), gamma, b, rng)
}

/// Writes `delta,p_gridboot,p_wald` rows for two sets on the same grid.
pub fn write_pvalue_curve<W: Write>(boot: Option<&ConfidenceSet>, wald: &ConfidenceSet, mut w: W) -> Result<()> {
    writeln!(w, "delta,p_gridboot,p_wald")?;
    for (i, d) in wald.grid.iter().enumerate() {
        match boot {
            Some(b) => writeln!(w, "{d},{},{}", Sci(b.p_values[i]), Sci(wald.p_values[i]))?,
            None => writeln!(w, "{d},,{}", Sci(wald.p_values[i]))?,
        }
    }
    Ok(())
}

/// Shortest round-trip float, in exponent form below `1e-4`.
struct Sci(f64);

impl std::fmt::Display for Sci {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 != 0.0 && self.0.abs() < 1e-4 {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_and_plateau() {
        let g = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let r = runs(&g, &[true, true, false, true, false, true]);
        assert_eq!(r, vec![Interval::new(0.0, 1.0), Interval::new(3.0, 3.0), Interval::new(5.0, 5.0)]);
        let (hl, plateau) = hodges_lehmann(&g, &[0.1, 0.5, 0.5, 0.5, 0.2, 0.5]);
        assert_eq!(hl, Some(2.0));
        assert_eq!(plateau, Some(Interval::new(1.0, 3.0)));
    }

    #[test]
    fn statistic_zero_at_null_cumulants() {
        let null = MixtureSpec::zero_mean(0.325, 0.8, 1.0).unwrap();
        let [k1, k2, k3] = null.population_cumulants().unwrap();
        let k = CumulantEstimates { k1, k2, k3, n: 300 };
        assert!(wald_stat_2(&k, &null).unwrap().abs() < 1e-20);
        assert!(wald_stat_3(&k, &null).unwrap().abs() < 1e-20);
    }

    #[test]
    fn statistic_matches_explicit_inverse() {
        let null = MixtureSpec::zero_mean(0.325, 0.5, 1.0).unwrap();
        let law = null.cumulant_law(400).unwrap();
        let k = CumulantEstimates { k1: 0.0, k2: 1.02, k3: -0.03, n: 400 };
        let [[a, b], [_, c]] = law.block23();
        let (d2, d3) = (k.k2 - law.mean[1], k.k3 - law.mean[2]);
        let det = a * c - b * b;
        let by_hand = (c * d2 * d2 - 2.0 * b * d2 * d3 + a * d3 * d3) / det;
        assert!((wald_stat_2(&k, &null).unwrap() - by_hand).abs() < 1e-12 * by_hand);
    }

    #[test]
    fn diagonal_is_degenerate() {
        let null = MixtureSpec::homoskedastic(0.325, 0.2, 0.2, 1.0).unwrap();
        let k = CumulantEstimates { k1: 0.0, k2: 1.0, k3: 0.0, n: 100 };
        assert!(matches!(wald_stat_3(&k, &null), Err(Error::Degenerate(_))));
    }

    #[test]
    fn lattice_inside_region() {
        let draws: Vec<[f64; 2]> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.1;
                [0.5 + 0.02 * t.sin(), 1.0 + 0.05 * (1.7 * t).cos()]
            })
            .collect();
        let r = NuisanceRegion::from_draws(&draws, 0.001).unwrap();
        let pts = r.lattice(15);
        assert!(pts.len() > 1 && pts.len() <= 225);
        assert_eq!(NuisanceRegion::point(0.3, 1.0).lattice(15), vec![[0.3, 1.0]]);
    }
}
