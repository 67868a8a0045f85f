use super::{lit, to_f64, Real};
use crate::error::{domain, Error, Result};

/// Number of intervals in the coarse scan of [`maximize_1d`].
pub const SCAN_POINTS: usize = 512;

/// Golden-section search for a local maximum of `f` on `[lo, hi]`.
///
/// Returns the best point seen, including the two endpoints, so a maximum on
/// the boundary is reported exactly.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = lit::<T>(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 500 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximizes `f` over `[lo, hi]`: a dense scan of [`SCAN_POINTS`] intervals
/// locates the best grid point, then golden-section search refines it
/// within the two neighbouring cells.
pub fn maximize_1d<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(format!("maximize_1d: need finite lo < hi (lo = {lo}, hi = {hi})")));
    }
    if !(tol > T::zero()) {
        return Err(domain("maximize_1d: tol must be positive"));
    }
    let step = (hi - lo) / lit::<T>(SCAN_POINTS as f64);
    let mut best_i = 0;
    let mut best_f = T::neg_infinity();
    for i in 0..=SCAN_POINTS {
        let x = if i == SCAN_POINTS { hi } else { lo + step * lit::<T>(i as f64) };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite { x: to_f64(x) });
        }
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let left = lo + step * lit::<T>(best_i.saturating_sub(1) as f64);
    let right = (lo + step * lit::<T>((best_i + 1).min(SCAN_POINTS) as f64)).min(hi);
    let (x, fx) = golden_max(&mut f, left, right, tol);
    let grid_x = lo + step * lit::<T>(best_i as f64);
    if fx >= best_f {
        Ok((x, fx))
    } else {
        Ok((grid_x, best_f))
    }
}
