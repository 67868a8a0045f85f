//! Direct maximization of the mixture likelihood.
//!
//! The equal-variance fits reparameterize to the weighted mean
//! `m = pi mu0 + (1 - pi) mu1` and the separation `delta`, profile out `m`
//! (and `sigma` when unknown) on a dense symmetric grid of `delta`, then
//! refine the best positive and best negative grid points separately. The
//! unequal-variance fit runs quasi-Newton ascent from several starts.

use super::{check_pi, shape_of, EstimateResult, EstimatorKind, Interval, LocalOptimum, PILEUP_TOL};
use crate::error::{Error, Result};
use crate::mixture::{sample_cumulants, Sample};
use crate::num::{golden_max, linalg};
use serde::{Deserialize, Serialize};

const Z975: f64 = 1.959_963_984_540_054;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    /// Points on the symmetric separation grid (forced odd so zero is on it).
    pub grid_points: usize,
    /// Grid half-width in units of `sqrt(k2) / min(pi, 1 - pi)`.
    pub half_width: f64,
    /// Golden-section tolerance relative to the outcome scale.
    pub refine_tol: f64,
    /// Finite-difference step for the observed information, relative to sigma.
    pub fd_step: f64,
    /// Pile-up tolerance relative to sigma.
    pub pileup_tol: f64,
    /// Lower bounds on sigma for the unknown-variance fits, relative to
    /// `sqrt(k2)`.
    pub equal_sigma_floor: f64,
    pub equal_sigma_ceiling: f64,
    pub unequal_sigma_floor: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            grid_points: 1025,
            half_width: 6.0,
            refine_tol: 1e-7,
            fd_step: 1e-4,
            pileup_tol: PILEUP_TOL,
            equal_sigma_floor: 1e-3,
            equal_sigma_ceiling: 10.0,
            unequal_sigma_floor: 0.05,
        }
    }
}

impl MleConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 3 || !(self.half_width > 0.0) || !(self.refine_tol > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::Config("invalid MLE configuration".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Eval {
    ll: f64,
    g: [f64; 2],
    h: [[f64; 2]; 2],
}

/// Log-likelihood and derivatives in `(m, ln sigma)` at fixed separation.
struct Profiler<'a> {
    y: &'a [f64],
    pi: f64,
    ln_1m: f64,
    ln_ratio: f64,
}

impl<'a> Profiler<'a> {
    fn new(y: &'a [f64], pi: f64) -> Self {
        Self { y, pi, ln_1m: (1.0 - pi).ln(), ln_ratio: (pi / (1.0 - pi)).ln() }
    }

    fn eval(&self, delta: f64, m: f64, s: f64, with_sigma: bool) -> Eval {
        let sigma = s.exp();
        let inv = 1.0 / (sigma * sigma);
        let shift = self.pi * delta - m;
        let (mut ll, mut gm, mut hmm) = (0.0, 0.0, 0.0);
        let (mut gs, mut hss, mut hms) = (0.0, 0.0, 0.0);
        let d2 = delta * delta;
        for &yi in self.y {
            let e1 = yi + shift;
            let e0 = e1 - delta;
            let r = self.ln_ratio + (2.0 * e1 - delta) * delta * 0.5 * inv;
            let t = (-r.abs()).exp();
            let soft = r.max(0.0) + t.ln_1p();
            ll += self.ln_1m - 0.5 * e1 * e1 * inv + soft;
            let w0 = if r > 0.0 { 1.0 / (1.0 + t) } else { t / (1.0 + t) };
            let w1 = 1.0 - w0;
            let eb = e1 - w0 * delta;
            gm += eb;
            hmm += w0 * w1;
            if with_sigma {
                let (q0, q1) = (e0 * e0, e1 * e1);
                let e2 = w0 * q0 + w1 * q1;
                let e3 = w0 * q0 * e0 + w1 * q1 * e1;
                let e4 = w0 * q0 * q0 + w1 * q1 * q1;
                gs += e2;
                hss += -2.0 * e2 * inv + inv * inv * (e4 - e2 * e2);
                hms += -2.0 * eb * inv + inv * inv * (e3 - eb * e2);
            }
        }
        let n = self.y.len() as f64;
        ll += -n * (s + LN_SQRT_2PI);
        let g = [gm * inv, if with_sigma { gs * inv - n } else { 0.0 }];
        let h = [[-n * inv + inv * inv * d2 * hmm, hms], [hms, hss]];
        Eval { ll, g, h }
    }

    /// Maximizes over `m` (and `s` if `s_bounds` is given) by safeguarded
    /// Newton iterations with an EM fallback.
    fn maximize(&self, delta: f64, m0: f64, s0: f64, s_bounds: Option<(f64, f64)>, scale: f64) -> (f64, f64, f64) {
        let with_sigma = s_bounds.is_some();
        let clamp_s = |s: f64| match s_bounds {
            Some((lo, hi)) => s.clamp(lo, hi),
            None => s0,
        };
        let n = self.y.len() as f64;
        let (mut m, mut s) = (m0, clamp_s(s0));
        let mut cur = self.eval(delta, m, s, with_sigma);
        for _ in 0..200 {
            let sigma2 = (2.0 * s).exp();
            let step = newton_step(&cur, with_sigma).unwrap_or_else(|| {
                // EM direction: exact ascent for the mixture likelihood.
                let ds = if with_sigma { 0.5 * (1.0 + cur.g[1] / n).max(1e-12).ln() } else { 0.0 };
                [cur.g[0] * sigma2 / n, ds]
            });
            if step[0].abs() < 1e-10 * scale && step[1].abs() < 1e-10 {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-8 {
                let (mc, sc) = (m + t * step[0], clamp_s(s + t * step[1]));
                let ev = self.eval(delta, mc, sc, with_sigma);
                if ev.ll >= cur.ll - 1e-13 * cur.ll.abs() {
                    accepted = Some((mc, sc, ev));
                    break;
                }
                t *= 0.5;
            }
            let Some((mc, sc, ev)) = accepted else { break };
            let gain = ev.ll - cur.ll;
            let moved = (mc - m).abs() / scale + (sc - s).abs();
            m = mc;
            s = sc;
            cur = ev;
            if gain.abs() <= 1e-12 * (1.0 + cur.ll.abs()) && moved < 1e-9 {
                break;
            }
        }
        (m, s, cur.ll)
    }
}

fn newton_step(ev: &Eval, with_sigma: bool) -> Option<[f64; 2]> {
    if with_sigma {
        let neg = [[-ev.h[0][0], -ev.h[0][1]], [-ev.h[1][0], -ev.h[1][1]]];
        linalg::solve_spd(&neg, &ev.g)
    } else if ev.h[0][0] < 0.0 {
        Some([-ev.g[0] / ev.h[0][0], 0.0])
    } else {
        None
    }
}

#[derive(Clone, Copy)]
struct Point {
    delta: f64,
    m: f64,
    s: f64,
    ll: f64,
}

struct ProfileFit {
    best: Point,
    optima: Vec<Point>,
    scale: f64,
}

fn profile_fit(y: &[f64], pi: f64, sigma: Option<f64>, cfg: &MleConfig) -> Result<ProfileFit> {
    cfg.validate()?;
    check_pi(pi)?;
    let k = sample_cumulants(y)?;
    if !(k.k2 > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let sd = k.k2.sqrt();
    let scale = sigma.unwrap_or(sd);
    let s_bounds = match sigma {
        Some(sg) => {
            if !(sg > 0.0) {
                return Err(Error::Domain(format!("sigma must be positive, got {sg}")));
            }
            None
        }
        None => Some(((cfg.equal_sigma_floor * sd).ln(), (cfg.equal_sigma_ceiling * sd).ln())),
    };
    let s_start = match sigma {
        Some(sg) => sg.ln(),
        None => 0.5 * (k.k2 * (k.n as f64 - 1.0) / k.n as f64).ln(),
    };
    let prof = Profiler::new(y, pi);
    let npts = cfg.grid_points | 1;
    let c = npts / 2;
    let half = cfg.half_width * sd / pi.min(1.0 - pi);
    let step = 2.0 * half / (npts - 1) as f64;
    let at = |i: usize| (i as f64 - c as f64) * step;

    let mut pts = vec![Point { delta: 0.0, m: 0.0, s: 0.0, ll: f64::NEG_INFINITY }; npts];
    let solve = |delta: f64, m: f64, s: f64| -> Result<Point> {
        let (m, s, ll) = prof.maximize(delta, m, s, s_bounds, scale);
        if !ll.is_finite() || !m.is_finite() {
            return Err(Error::NonFinite { x: delta });
        }
        Ok(Point { delta, m, s, ll })
    };
    // Along the sweep the profile path is extrapolated linearly from the
    // two previous solutions; one Newton correction then suffices and the
    // profile value is corrected to second order.
    let sweep = |delta: f64, a: Point, b: Option<Point>| -> Result<Point> {
        let (mp, sp) = match b {
            Some(b) => (2.0 * a.m - b.m, 2.0 * a.s - b.s),
            None => (a.m, a.s),
        };
        let ev = prof.eval(delta, mp, sp, s_bounds.is_some());
        if let Some(st) = newton_step(&ev, s_bounds.is_some()) {
            let sn = match s_bounds {
                Some(_) => sp + st[1],
                None => sp,
            };
            let inside = s_bounds.is_none_or(|(lo, hi)| sn > lo && sn < hi);
            if st[0].abs() < 1e-3 * scale && st[1].abs() < 1e-3 && inside && ev.ll.is_finite() {
                let ll = ev.ll + 0.5 * (ev.g[0] * st[0] + ev.g[1] * st[1]);
                return Ok(Point { delta, m: mp + st[0], s: sn, ll });
            }
        }
        solve(delta, a.m, a.s)
    };
    pts[c] = solve(0.0, k.k1, s_start)?;
    for i in c + 1..npts {
        let prev = (i >= c + 2).then(|| pts[i - 2]);
        pts[i] = sweep(at(i), pts[i - 1], prev)?;
    }
    for i in (0..c).rev() {
        let prev = (i + 2 <= c).then(|| pts[i + 2]);
        pts[i] = sweep(at(i), pts[i + 1], prev)?;
    }

    let argmax = |range: std::ops::RangeInclusive<usize>| {
        range.fold(None::<usize>, |b, i| match b {
            Some(j) if pts[j].ll >= pts[i].ll => Some(j),
            _ => Some(i),
        })
    };
    let refine = |i: usize, lo_idx: usize, hi_idx: usize| -> Result<Point> {
        let lo = at(i.saturating_sub(1).max(lo_idx));
        let hi = at((i + 1).min(hi_idx));
        let mut warm = (pts[i].m, pts[i].s);
        let mut last_err = None;
        let (d, _) = golden_max(
            |d: f64| match solve(d, warm.0, warm.1) {
                Ok(p) => {
                    warm = (p.m, p.s);
                    p.ll
                }
                Err(e) => {
                    last_err = Some(e);
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            cfg.refine_tol * scale,
        );
        if let Some(e) = last_err {
            return Err(e);
        }
        let p = solve(d, pts[i].m, pts[i].s)?;
        Ok(if p.ll >= pts[i].ll { p } else { pts[i] })
    };
    let ip = argmax(c..=npts - 1).unwrap_or(c);
    let ineg = argmax(0..=c).unwrap_or(c);
    let pos = refine(ip, c, npts - 1)?;
    let neg = refine(ineg, 0, c)?;
    let best = if neg.ll > pos.ll { neg } else { pos };
    let mut optima = vec![pos];
    if (neg.delta - pos.delta).abs() > cfg.pileup_tol * scale {
        optima.push(neg);
    }
    Ok(ProfileFit { best, optima, scale })
}

/// Profile log-likelihood of the separation at each point of `deltas`,
/// with the mean (and, if `sigma` is `None`, a common SD) maximized out.
pub fn profile_loglik(y: &Sample<f64>, pi: f64, sigma: Option<f64>, deltas: &[f64], cfg: &MleConfig) -> Result<Vec<f64>> {
    check_pi(pi)?;
    let k = sample_cumulants(&y.y)?;
    if !(k.k2 > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let sd = k.k2.sqrt();
    let (s_bounds, mut s) = match sigma {
        Some(sg) if sg > 0.0 => (None, sg.ln()),
        Some(sg) => return Err(Error::Domain(format!("sigma must be positive, got {sg}"))),
        None => (Some(((cfg.equal_sigma_floor * sd).ln(), (cfg.equal_sigma_ceiling * sd).ln())), sd.ln()),
    };
    let prof = Profiler::new(&y.y, pi);
    let mut m = k.k1;
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let (mm, ss, ll) = prof.maximize(d, m, s, s_bounds, sigma.unwrap_or(sd));
        if !ll.is_finite() {
            return Err(Error::NonFinite { x: d });
        }
        (m, s) = (mm, ss);
        out.push(ll);
    }
    Ok(out)
}

/// Central-difference Hessian of `f` at `x` with per-coordinate steps.
fn fd_hessian<const N: usize, F: Fn(&[f64; N]) -> f64>(f: F, x: &[f64; N], h: &[f64; N]) -> [[f64; N]; N] {
    let f0 = f(x);
    let mut out = [[0.0; N]; N];
    let shifted = |d: &[(usize, f64)]| {
        let mut p = *x;
        for &(i, v) in d {
            p[i] += v;
        }
        f(&p)
    };
    for i in 0..N {
        out[i][i] = (shifted(&[(i, h[i])]) - 2.0 * f0 + shifted(&[(i, -h[i])])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (shifted(&[(i, h[i]), (j, h[j])]) - shifted(&[(i, h[i]), (j, -h[j])])
                - shifted(&[(i, -h[i]), (j, h[j])])
                + shifted(&[(i, -h[i]), (j, -h[j])]))
                / (4.0 * h[i] * h[j]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Covariance of `(mu0, mu1)` from the observed information, or `None`
/// when the Hessian is not negative definite.
fn mean_covariance<const N: usize>(hess: &[[f64; N]; N]) -> Option<[[f64; 2]; 2]> {
    let mut neg = *hess;
    for row in neg.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    let inv = linalg::inverse_spd(&neg)?;
    let cov = [[inv[0][0], inv[0][1]], [inv[1][0], inv[1][1]]];
    let var = cov[0][0] + cov[1][1] - 2.0 * cov[0][1];
    (var > 0.0 && var.is_finite()).then_some(cov)
}

fn mixture_ll(y: &[f64], pi: f64, mu0: f64, mu1: f64, s0: f64, s1: f64) -> f64 {
    if !(s0 > 0.0 && s1 > 0.0) {
        return f64::NEG_INFINITY;
    }
    let (lp0, lp1) = (pi.ln() - s0.ln(), (1.0 - pi).ln() - s1.ln());
    let (i0, i1) = (0.5 / (s0 * s0), 0.5 / (s1 * s1));
    let mut ll = 0.0;
    for &v in y {
        let a = lp0 - (v - mu0) * (v - mu0) * i0;
        let b = lp1 - (v - mu1) * (v - mu1) * i1;
        let mx = a.max(b);
        ll += mx + (-(a - b).abs()).exp().ln_1p();
    }
    ll - y.len() as f64 * LN_SQRT_2PI
}

fn attach_se(r: &mut EstimateResult, cov: Option<[[f64; 2]; 2]>) {
    match cov {
        Some(c) => {
            let se = (c[0][0] + c[1][1] - 2.0 * c[0][1]).sqrt();
            let d = r.delta_or_zero();
            r.se = Some(se);
            r.wald_ci = Some(Interval::new(d - Z975 * se, d + Z975 * se));
            r.mean_cov = Some(c);
        }
        None => r.notes.push("observed information is not positive definite; no standard error".into()),
    }
}

fn from_profile(kind: EstimatorKind, fit: &ProfileFit, pi: f64, cfg: &MleConfig) -> EstimateResult {
    let b = fit.best;
    let mu0 = b.m + (1.0 - pi) * b.delta;
    let mu1 = b.m - pi * b.delta;
    let tol = cfg.pileup_tol * fit.scale;
    let optima: Vec<LocalOptimum> = fit.optima.iter().map(|p| LocalOptimum { delta: p.delta, loglik: p.ll }).collect();
    let delta = b.delta;
    EstimateResult {
        kind,
        delta: Some(delta),
        mu0,
        mu1,
        sigma0: Some(b.s.exp()),
        sigma1: Some(b.s.exp()),
        se: None,
        wald_ci: None,
        shape: shape_of(delta, &optima, b.ll, tol),
        local_optima: optima,
        loglik: Some(b.ll),
        mean_cov: None,
        cells: vec![],
        notes: vec![],
    }
}

/// MLE of the component means with known common SD `sigma`.
pub fn mle_known_var(y: &Sample<f64>, pi: f64, sigma: f64, cfg: &MleConfig) -> Result<EstimateResult> {
    let fit = profile_fit(&y.y, pi, Some(sigma), cfg)?;
    let mut r = from_profile(EstimatorKind::MleKnownVar, &fit, pi, cfg);
    let h = cfg.fd_step * sigma;
    let hess = fd_hessian(|p: &[f64; 2]| mixture_ll(&y.y, pi, p[0], p[1], sigma, sigma), &[r.mu0, r.mu1], &[h, h]);
    attach_se(&mut r, mean_covariance(&hess));
    Ok(r)
}

/// MLE with a common but unknown SD, bounded to
/// `[equal_sigma_floor, equal_sigma_ceiling] * sqrt(k2)`.
pub fn mle_unknown_equal_var(y: &Sample<f64>, pi: f64, cfg: &MleConfig) -> Result<EstimateResult> {
    let fit = profile_fit(&y.y, pi, None, cfg)?;
    let mut r = from_profile(EstimatorKind::MleUnknownEqualVar, &fit, pi, cfg);
    let sigma = r.sigma0.unwrap_or(fit.scale);
    let h = cfg.fd_step * sigma;
    let hess = fd_hessian(
        |p: &[f64; 3]| mixture_ll(&y.y, pi, p[0], p[1], p[2], p[2]),
        &[r.mu0, r.mu1, sigma],
        &[h, h, h],
    );
    attach_se(&mut r, mean_covariance(&hess));
    Ok(r)
}

struct Unequal<'a> {
    y: &'a [f64],
    pi: f64,
    floor: f64,
}

impl Unequal<'_> {
    fn sigmas(&self, t: &[f64; 4]) -> (f64, f64) {
        (self.floor + t[2].exp(), self.floor + t[3].exp())
    }

    fn value_grad(&self, t: &[f64; 4]) -> (f64, [f64; 4]) {
        let (s0, s1) = self.sigmas(t);
        let (lp0, lp1) = (self.pi.ln() - s0.ln(), (1.0 - self.pi).ln() - s1.ln());
        let (i0, i1) = (1.0 / (s0 * s0), 1.0 / (s1 * s1));
        let mut ll = 0.0;
        let mut g = [0.0; 4];
        for &v in self.y {
            let (e0, e1) = (v - t[0], v - t[1]);
            let a = lp0 - 0.5 * e0 * e0 * i0;
            let b = lp1 - 0.5 * e1 * e1 * i1;
            let r = a - b;
            let x = (-r.abs()).exp();
            ll += a.max(b) + x.ln_1p();
            let w0 = if r > 0.0 { 1.0 / (1.0 + x) } else { x / (1.0 + x) };
            let w1 = 1.0 - w0;
            g[0] += w0 * e0 * i0;
            g[1] += w1 * e1 * i1;
            g[2] += w0 * (e0 * e0 * i0 - 1.0);
            g[3] += w1 * (e1 * e1 * i1 - 1.0);
        }
        // d/dt_k = d/dsigma_k * (sigma_k - floor), and d/dsigma_k = (.) / sigma_k.
        g[2] *= (s0 - self.floor) / s0;
        g[3] *= (s1 - self.floor) / s1;
        (ll - self.y.len() as f64 * LN_SQRT_2PI, g)
    }

    /// BFGS ascent from `t0`.
    fn ascend(&self, t0: [f64; 4], scale: f64) -> Option<([f64; 4], f64)> {
        let n = self.y.len() as f64;
        let d0 = [scale * scale / n, scale * scale / n, 1.0 / n, 1.0 / n];
        let mut hinv = [[0.0; 4]; 4];
        for i in 0..4 {
            hinv[i][i] = d0[i];
        }
        let mut t = t0;
        let (mut f, mut g) = self.value_grad(&t);
        if !f.is_finite() {
            return None;
        }
        for _ in 0..2000 {
            let mut p = [0.0; 4];
            for i in 0..4 {
                p[i] = (0..4).map(|j| hinv[i][j] * g[j]).sum();
            }
            let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !(slope > 0.0) {
                hinv = [[0.0; 4]; 4];
                for i in 0..4 {
                    hinv[i][i] = d0[i];
                    p[i] = d0[i] * g[i];
                }
                slope = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            }
            if slope < 1e-13 {
                break;
            }
            let mut a = 1.0;
            let mut next = None;
            for _ in 0..60 {
                let mut tc = t;
                for i in 0..4 {
                    tc[i] += a * p[i];
                }
                tc[2] = tc[2].min(50.0);
                tc[3] = tc[3].min(50.0);
                let (fc, gc) = self.value_grad(&tc);
                if fc.is_finite() && fc >= f + 1e-4 * a * slope {
                    next = Some((tc, fc, gc));
                    break;
                }
                a *= 0.5;
            }
            let Some((tc, fc, gc)) = next else { break };
            let s: Vec<f64> = (0..4).map(|i| tc[i] - t[i]).collect();
            // Ascent on f is descent on -f; curvature uses -g.
            let yv: Vec<f64> = (0..4).map(|i| g[i] - gc[i]).collect();
            let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
            if sy > 1e-300 {
                let hy: Vec<f64> = (0..4).map(|i| (0..4).map(|j| hinv[i][j] * yv[j]).sum()).collect();
                let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
                for i in 0..4 {
                    for j in 0..4 {
                        hinv[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                    }
                }
            }
            let gain = fc - f;
            t = tc;
            f = fc;
            g = gc;
            if gain < 1e-12 * (1.0 + f.abs()) && slope < 1e-10 {
                break;
            }
        }
        Some((t, f))
    }
}

/// MLE with unrestricted component SDs, each bounded below by
/// `unequal_sigma_floor * sqrt(k2)`. Runs from the third-cumulant moment
/// solution, its reflection and two equal-mean, unequal-spread starts, and
/// reports every distinct local optimum found.
pub fn mle_unknown_unequal_var(y: &Sample<f64>, pi: f64, cfg: &MleConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    check_pi(pi)?;
    let k = sample_cumulants(&y.y)?;
    if !(k.k2 > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let sd = k.k2.sqrt();
    let floor = cfg.unequal_sigma_floor * sd;
    let model = Unequal { y: &y.y, pi, floor };
    let q = pi * (1.0 - pi);
    let to_t = |mu0: f64, mu1: f64, v0: f64, v1: f64| {
        let t = |v: f64| (v.max(4.0 * floor * floor).sqrt() - floor).max(1e-3 * sd).ln();
        [mu0, mu1, t(v0), t(v1)]
    };
    let d3 = (k.k3 / (q * (1.0 - 2.0 * pi))).cbrt();
    let v_mom = (k.k2 - q * d3 * d3).max(0.25 * k.k2);
    let mut starts = Vec::new();
    for d in [d3, -d3] {
        let mu1 = k.k1 - pi * d;
        starts.push(to_t(mu1 + d, mu1, v_mom, v_mom));
    }
    let spread = 0.5;
    starts.push(to_t(k.k1, k.k1, k.k2 * (1.0 + spread * (1.0 - pi)), k.k2 * (1.0 - spread * pi)));
    starts.push(to_t(k.k1, k.k1, k.k2 * (1.0 - spread * (1.0 - pi)), k.k2 * (1.0 + spread * pi)));

    let mut found: Vec<([f64; 4], f64)> = Vec::new();
    for s in &starts {
        if let Some((t, f)) = model.ascend(*s, sd) {
            if f.is_finite() {
                found.push((t, f));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::Optimizer(format!("all starts failed: {starts:?}")));
    }
    let mut distinct: Vec<([f64; 4], f64)> = Vec::new();
    for (t, f) in found {
        let dup = distinct.iter().any(|(u, g)| ((t[0] - t[1]) - (u[0] - u[1])).abs() < 1e-2 * sd && (f - g).abs() < 1e-4);
        if !dup {
            distinct.push((t, f));
        }
    }
    let best = distinct
        .iter()
        .copied()
        .reduce(|a, b| {
            let (da, db) = (a.0[0] - a.0[1], b.0[0] - b.0[1]);
            if b.1 > a.1 || (b.1 == a.1 && db > da) {
                b
            } else {
                a
            }
        })
        .expect("nonempty");
    let (t, ll) = best;
    let (s0, s1) = model.sigmas(&t);
    let delta = t[0] - t[1];
    let tol = cfg.pileup_tol * sd;
    let optima: Vec<LocalOptimum> = distinct.iter().map(|(u, f)| LocalOptimum { delta: u[0] - u[1], loglik: *f }).collect();
    let mut r = EstimateResult {
        kind: EstimatorKind::MleUnknownUnequalVar,
        delta: Some(delta),
        mu0: t[0],
        mu1: t[1],
        sigma0: Some(s0),
        sigma1: Some(s1),
        se: None,
        wald_ci: None,
        shape: shape_of(delta, &optima, ll, tol),
        local_optima: optima,
        loglik: Some(ll),
        mean_cov: None,
        cells: vec![],
        notes: vec![],
    };
    for (s, label) in [(s0, "sigma0"), (s1, "sigma1")] {
        if s < floor * (1.0 + 1e-6) {
            r.notes.push(format!("{label} at its lower bound"));
        }
    }
    let h = cfg.fd_step * sd;
    let hess = fd_hessian(
        |p: &[f64; 4]| mixture_ll(&y.y, pi, p[0], p[1], p[2].max(floor), p[3].max(floor)),
        &[t[0], t[1], s0, s1],
        &[h, h, h, h],
    );
    attach_se(&mut r, mean_covariance(&hess));
    Ok(r)
}
