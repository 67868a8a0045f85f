//! Numerical primitives: Gaussian functions, the chi-square survival
//! function, one-dimensional maximization, adaptive quadrature and seeded
//! random streams.
//!
//! Everything except the random streams and the small dense solvers in
//! [`linalg`] is generic over [`Real`], so the same code runs in `f32` and
//! `f64`.

mod gamma;
pub mod linalg;
mod normal;
mod optimize;
mod quad;
pub(crate) mod rng;

pub use gamma::{chi2_sf, ln_gamma, regularized_gamma_q};
pub use normal::{erfc, normal_cdf, normal_pdf, normal_quantile};
pub use optimize::{golden_max, maximize_1d, SCAN_POINTS};
pub use quad::{integrate, QuadratureConfig};
pub use rng::StreamRng;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar accepted by the generic numerics.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
