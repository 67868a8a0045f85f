//! The two-component Gaussian mixture: parameterization, sampling,
//! likelihood, cumulants and the joint asymptotic law of the k-statistics.

use crate::error::{domain, Error, Result};
use crate::num::{lit, normal_pdf, Real, StreamRng};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// What is assumed about the component variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceKnowledge {
    KnownEqual,
    UnknownEqual,
    UnknownUnequal,
}

/// `pi N(mu0, sigma0^2) + (1 - pi) N(mu1, sigma1^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec<T> {
    pub pi: T,
    pub mu0: T,
    pub mu1: T,
    pub sigma0: T,
    pub sigma1: T,
    pub variance: VarianceKnowledge,
}

impl<T: Real> MixtureSpec<T> {
    pub fn new(pi: T, mu0: T, mu1: T, sigma0: T, sigma1: T, variance: VarianceKnowledge) -> Result<Self> {
        let spec = Self { pi, mu0, mu1, sigma0, sigma1, variance };
        spec.validate()?;
        Ok(spec)
    }

    /// Equal, known component SDs.
    pub fn homoskedastic(pi: T, mu0: T, mu1: T, sigma: T) -> Result<Self> {
        Self::new(pi, mu0, mu1, sigma, sigma, VarianceKnowledge::KnownEqual)
    }

    /// Mean-zero mixture with separation `delta`: `mu0 = (1-pi) delta`,
    /// `mu1 = -pi delta`.
    pub fn zero_mean(pi: T, delta: T, sigma: T) -> Result<Self> {
        Self::homoskedastic(pi, (T::one() - pi) * delta, -pi * delta, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pi > T::zero() && self.pi < T::one()) {
            return Err(domain(format!("pi must lie in (0, 1), got {}", self.pi)));
        }
        if !self.mu0.is_finite() || !self.mu1.is_finite() {
            return Err(domain("component means must be finite"));
        }
        for s in [self.sigma0, self.sigma1] {
            if !(s > T::zero()) || !s.is_finite() {
                return Err(domain(format!("component SDs must be positive, got {s}")));
            }
        }
        if self.variance != VarianceKnowledge::UnknownUnequal && self.sigma0 != self.sigma1 {
            return Err(domain("equal-variance model requires sigma0 == sigma1"));
        }
        Ok(())
    }

    pub fn delta(&self) -> T {
        self.mu0 - self.mu1
    }

    pub fn is_homoskedastic(&self) -> bool {
        self.sigma0 == self.sigma1
    }

    fn require_homoskedastic(&self) -> Result<()> {
        self.validate()?;
        if self.variance == VarianceKnowledge::UnknownUnequal {
            return Err(Error::UnsupportedModel(
                "cumulant formulas assume equal component variances".into(),
            ));
        }
        Ok(())
    }

    /// `(kappa1, kappa2, kappa3)` of the mixture.
    pub fn population_cumulants(&self) -> Result<[T; 3]> {
        self.require_homoskedastic()?;
        let (pi, d) = (self.pi, self.delta());
        let q = pi * (T::one() - pi);
        let one_m_2pi = T::one() - lit::<T>(2.0) * pi;
        Ok([
            self.mu1 + pi * d,
            self.sigma0 * self.sigma0 + q * d * d,
            q * one_m_2pi * d * d * d,
        ])
    }

    /// Joint normal approximation to the k-statistics from `n` draws.
    pub fn cumulant_law(&self, n: usize) -> Result<CumulantLaw<T>> {
        if n < 3 {
            return Err(Error::InsufficientData(format!("cumulant law needs n >= 3, got {n}")));
        }
        let mean = self.population_cumulants()?;
        let [_, k2, k3] = mean;
        let c = LawConstants::new(self.pi);
        let d = self.delta();
        let d2 = d * d;
        let d4 = d2 * d2;
        let two = lit::<T>(2.0);
        let six = lit::<T>(6.0);
        let nn = lit::<T>(n as f64);
        let v11 = k2;
        let v12 = k3;
        let v13 = c.c13 * d4;
        let v22 = c.c22 * d4 + two * k2 * k2;
        let v23 = c.c32 * d4 * d + six * k2 * k3;
        let v33 = c.c33a * d4 * d2 + c.c33b * k2 * d4 + six * k2 * k2 * k2;
        let covariance = [
            [v11 / nn, v12 / nn, v13 / nn],
            [v12 / nn, v22 / nn, v23 / nn],
            [v13 / nn, v23 / nn, v33 / nn],
        ];
        Ok(CumulantLaw { mean, covariance })
    }

    /// Draws `n` observations. The component label is Bernoulli(pi), then a
    /// Gaussian draw from that component.
    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> Result<Sample<T>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InsufficientData("sample size must be at least 1".into()));
        }
        let pi = self.pi.to_f64().unwrap_or(f64::NAN);
        let y = (0..n)
            .map(|_| {
                let first = rng.random::<f64>() < pi;
                let z: f64 = rng.sample(StandardNormal);
                let z = lit::<T>(z);
                if first {
                    self.mu0 + self.sigma0 * z
                } else {
                    self.mu1 + self.sigma1 * z
                }
            })
            .collect();
        Ok(Sample::new(y))
    }

    /// Observed-data log-likelihood.
    pub fn loglik(&self, y: &[T]) -> Result<T> {
        self.validate()?;
        let ln_pi = self.pi.ln();
        let ln_1m = (T::one() - self.pi).ln();
        let half = lit::<T>(0.5);
        let ln_norm0 = -self.sigma0.ln() - half * (lit::<T>(2.0) * T::PI()).ln();
        let ln_norm1 = -self.sigma1.ln() - half * (lit::<T>(2.0) * T::PI()).ln();
        let mut total = T::zero();
        for &yi in y {
            let z0 = (yi - self.mu0) / self.sigma0;
            let z1 = (yi - self.mu1) / self.sigma1;
            let a = ln_pi + ln_norm0 - half * z0 * z0;
            let b = ln_1m + ln_norm1 - half * z1 * z1;
            let m = a.max(b);
            total = total + m + ((a - m).exp() + (b - m).exp()).ln();
        }
        Ok(total)
    }

    /// Mixture density at `x`.
    pub fn density(&self, x: T) -> Result<T> {
        Ok(self.pi * normal_pdf(x, self.mu0, self.sigma0)?
            + (T::one() - self.pi) * normal_pdf(x, self.mu1, self.sigma1)?)
    }
}

/// The five coefficients of the fourth- and higher-order terms in the
/// cumulant covariance, as functions of the weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawConstants<T> {
    pub c13: T,
    pub c22: T,
    pub c32: T,
    pub c33a: T,
    pub c33b: T,
}

impl<T: Real> LawConstants<T> {
    pub fn new(pi: T) -> Self {
        let one = T::one();
        let q = pi * (one - pi);
        let r = one - lit::<T>(2.0) * pi;
        let six_q = lit::<T>(6.0) * q;
        // The cross term between the mean and the third k-statistic scales
        // with the fourth cumulant of the Bernoulli label, q (1 - 6q).
        Self {
            c13: q * (one - six_q),
            c22: q * (one - six_q),
            c32: q * r * (one - lit::<T>(12.0) * q),
            c33a: q * (one - lit::<T>(30.0) * q + lit::<T>(120.0) * q * q)
                + lit::<T>(9.0) * q * q * r * r,
            c33b: lit::<T>(9.0) * q * (one - six_q),
        }
    }
}

/// Unbiased k-statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimates<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub n: usize,
}

/// Mean and covariance (already divided by n) of `(k1, k2, k3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantLaw<T> {
    pub mean: [T; 3],
    pub covariance: [[T; 3]; 3],
}

impl<T: Real> CumulantLaw<T> {
    /// Covariance of `(k2, k3)`.
    pub fn block23(&self) -> [[T; 2]; 2] {
        let c = &self.covariance;
        [[c[1][1], c[1][2]], [c[2][1], c[2][2]]]
    }
}

/// Observations with an optional binary covariate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sample<T> {
    pub y: Vec<T>,
    pub x: Option<Vec<u8>>,
}

impl<T: Real> Sample<T> {
    pub fn new(y: Vec<T>) -> Self {
        Self { y, x: None }
    }

    pub fn with_covariate(y: Vec<T>, x: Vec<u8>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(domain("covariate and outcome lengths differ"));
        }
        if x.iter().any(|&v| v > 1) {
            return Err(domain("covariate must be binary"));
        }
        Ok(Self { y, x: Some(x) })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Outcomes in covariate cell `level`.
    pub fn cell(&self, level: u8) -> Result<Vec<T>> {
        let x = self
            .x
            .as_ref()
            .ok_or_else(|| domain("sample has no covariate column"))?;
        Ok(self.y.iter().zip(x).filter(|(_, &xi)| xi == level).map(|(&yi, _)| yi).collect())
    }

    pub fn cumulants(&self) -> Result<CumulantEstimates<T>> {
        sample_cumulants(&self.y)
    }

    pub fn shifted(&self, c: T) -> Self {
        Self { y: self.y.iter().map(|&v| v + c).collect(), x: self.x.clone() }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { y: self.y.iter().map(|&v| v * s).collect(), x: self.x.clone() }
    }
}

/// Unbiased k-statistics: `k2 = S2/(n-1)`, `k3 = n S3/((n-1)(n-2))`,
/// with `Sj` the centred power sums.
pub fn sample_cumulants<T: Real>(y: &[T]) -> Result<CumulantEstimates<T>> {
    let n = y.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("k-statistics need n >= 3, got {n}")));
    }
    let nn = lit::<T>(n as f64);
    let mean = y.iter().fold(T::zero(), |a, &v| a + v) / nn;
    let (mut s2, mut s3) = (T::zero(), T::zero());
    for &v in y {
        let d = v - mean;
        let d2 = d * d;
        s2 = s2 + d2;
        s3 = s3 + d2 * d;
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    Ok(CumulantEstimates {
        k1: mean,
        k2: s2 / (nn - one),
        k3: nn * s3 / ((nn - one) * (nn - two)),
        n,
    })
}

impl MixtureSpec<f64> {
    /// k-statistics of a fresh sample of size `n`, accumulated on the fly
    /// without storing the draws.
    pub fn simulate_cumulants(&self, n: usize, rng: &mut StreamRng) -> Result<CumulantEstimates<f64>> {
        self.validate()?;
        if n < 3 {
            return Err(Error::InsufficientData(format!("k-statistics need n >= 3, got {n}")));
        }
        // Power sums about the population mean keep cancellation small.
        let c = self.pi * self.mu0 + (1.0 - self.pi) * self.mu1;
        let (a0, a1) = (self.mu0 - c, self.mu1 - c);
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let v = if rng.random::<f64>() < self.pi { a0 + self.sigma0 * z } else { a1 + self.sigma1 * z };
            s1 += v;
            let v2 = v * v;
            s2 += v2;
            s3 += v2 * v;
        }
        Ok(k_statistics_from_power_sums(n, c, s1, s2, s3))
    }
}

/// k-statistics from raw power sums of `y - c`.
pub(crate) fn k_statistics_from_power_sums(n: usize, c: f64, s1: f64, s2: f64, s3: f64) -> CumulantEstimates<f64> {
    let nn = n as f64;
    let m = s1 / nn;
    let c2 = s2 - nn * m * m;
    let c3 = s3 - 3.0 * m * s2 + 2.0 * nn * m * m * m;
    CumulantEstimates {
        k1: c + m,
        k2: c2.max(0.0) / (nn - 1.0),
        k3: nn * c3 / ((nn - 1.0) * (nn - 2.0)),
        n,
    }
}

impl Sample<f64> {
    /// Reads `y[,x]` rows. A header row is accepted if its first field is
    /// not numeric; lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut y = Vec::new();
        let mut x: Vec<u8> = Vec::new();
        let mut columns = None;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(i as u64 + 1),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let first = rec.get(0).unwrap_or("");
            if y.is_empty() && columns.is_none() && first.parse::<f64>().is_err() {
                columns = Some(rec.len());
                continue;
            }
            let width = *columns.get_or_insert(rec.len());
            if rec.len() != width || !(1..=2).contains(&width) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {width} field(s) of the form y[,x], found {}", rec.len()),
                });
            }
            let v: f64 = first.parse().map_err(|_| Error::Parse {
                line,
                message: format!("outcome {first:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: "outcome is not finite".into() });
            }
            y.push(v);
            if width == 2 {
                let f = rec.get(1).unwrap_or("");
                match f {
                    "0" => x.push(0),
                    "1" => x.push(1),
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: format!("covariate {f:?} must be 0 or 1"),
                        })
                    }
                }
            }
        }
        if columns == Some(2) {
            Sample::with_covariate(y, x)
        } else {
            Ok(Sample::new(y))
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.x {
            Some(x) => {
                writeln!(w, "y,x")?;
                for (v, xi) in self.y.iter().zip(x) {
                    writeln!(w, "{v},{xi}")?;
                }
            }
            None => {
                writeln!(w, "y")?;
                for v in &self.y {
                    writeln!(w, "{v}")?;
                }
            }
        }
        Ok(())
    }
}
