use super::{lit, Real};
use crate::error::{domain, Result};

/// Gaussian density with mean `mu` and standard deviation `sigma`.
pub fn normal_pdf<T: Real>(x: T, mu: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(domain(format!("normal_pdf: sigma must be positive, got {sigma}")));
    }
    let z = (x - mu) / sigma;
    let two = lit::<T>(2.0);
    Ok((-(z * z) / two).exp() / (sigma * (two * T::PI()).sqrt()))
}

/// Complementary error function.
///
/// Power series for `erf` on `|x| <= 2` (all terms positive, no
/// cancellation) and a Lentz continued fraction for `erfc` beyond.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let cut = lit::<T>(2.0);
    if x < -cut {
        lit::<T>(2.0) - erfc_cf(-x)
    } else if x > cut {
        erfc_cf(x)
    } else {
        T::one() - erf_series(x)
    }
}

fn erf_series<T: Real>(x: T) -> T {
    // erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))
    let x2 = x * x;
    let two = lit::<T>(2.0);
    let mut term = x;
    let mut sum = x;
    let mut k = T::one();
    for _ in 0..200 {
        k = k + two;
        term = term * two * x2 / k;
        sum = sum + term;
        if term.abs() <= sum.abs() * T::epsilon() {
            break;
        }
    }
    two / T::PI().sqrt() * (-x2).exp() * sum
}

fn erfc_cf<T: Real>(x: T) -> T {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = T::min_positive_value() / T::epsilon();
    let half = lit::<T>(0.5);
    let mut f = x;
    if f == T::zero() {
        f = tiny;
    }
    let mut c = f;
    let mut d = T::zero();
    for k in 1..500 {
        let a = lit::<T>(k as f64) * half;
        d = x + a * d;
        if d == T::zero() {
            d = tiny;
        }
        c = x + a / c;
        if c == T::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-(x * x)).exp() / (T::PI().sqrt() * f)
}

/// Standard normal distribution function.
pub fn normal_cdf<T: Real>(x: T) -> T {
    lit::<T>(0.5) * erfc(-x / T::SQRT_2())
}

/// Standard normal quantile.
///
/// Rational starting value refined by Halley steps against [`normal_cdf`].
pub fn normal_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain(format!("normal_quantile: p must lie in (0, 1), got {p}")));
    }
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let mut x = lit::<T>(acklam(pf));
    let half = lit::<T>(0.5);
    for _ in 0..4 {
        let e = normal_cdf(x) - p;
        let dens = (-(x * x) * half).exp() / (lit::<T>(2.0) * T::PI()).sqrt();
        if dens == T::zero() {
            break;
        }
        let u = e / dens;
        x = x - u / (T::one() + x * u * half);
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let lo = 0.02425;
    if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p > 1.0 - lo {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference values (mpmath).
    const PDF_1_5_0_2_0_7: f64 = 0.10159576932727635;
    const CDF_1: f64 = 0.84134474606854293;
    const CDF_M3_5: f64 = 2.3262907903552504e-4;
    const CDF_M8: f64 = 6.2209605742717841e-16;

    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pdf_values() {
        assert!((normal_pdf(0.0_f64, 0.0, 1.0).unwrap() - 0.3989422804014327).abs() < 1e-15);
        for &(mu, s) in &[(0.3, 0.5), (-2.0, 3.0), (10.0, 0.01)] {
            let peak = normal_pdf(mu, mu, s).unwrap();
            let expect = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
            assert!((peak - expect).abs() <= 1e-14 * expect);
        }
        let v = normal_pdf(1.5, 0.2, 0.7).unwrap();
        assert!((v - PDF_1_5_0_2_0_7).abs() < 1e-15);
        assert!(normal_pdf(0.0, 0.0, 0.0).is_err());
        assert!(normal_pdf(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - CDF_1).abs() < 1e-15);
        assert!((normal_cdf(-3.5) - CDF_M3_5).abs() < 1e-17);
        assert!((normal_cdf(-8.0) - CDF_M8).abs() < 1e-28);
        assert!(normal_cdf(-8.0) < 1e-15);
        let root = bisect_quantile(0.975);
        assert!((root - 1.959964).abs() < 1e-6);
        assert!((normal_cdf(1.959964_f64) - 0.975).abs() < 1e-7);
    }

    #[test]
    fn cdf_symmetry_and_monotonicity() {
        let mut prev = 0.0;
        for i in -800..=800 {
            let x = i as f64 * 0.01;
            let c = normal_cdf(x);
            assert!((normal_cdf(-x) - (1.0 - c)).abs() < 1e-14, "x = {x}");
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn quantile_round_trip() {
        for i in 1..=999 {
            let p = i as f64 / 1000.0;
            let q = normal_quantile(p).unwrap();
            assert!((normal_cdf(q) - p).abs() < 1e-12, "p = {p}");
            assert!((q - bisect_quantile(p)).abs() < 1e-10);
        }
        assert!(normal_quantile(0.0).is_err());
    }

    #[test]
    fn single_precision() {
        let c: f32 = normal_cdf(1.0f32);
        assert!((c - CDF_1 as f32).abs() < 1e-6);
        let p: f32 = normal_pdf(0.0f32, 0.0, 1.0).unwrap();
        assert!((p - 0.398_942_3).abs() < 1e-6);
    }
}
