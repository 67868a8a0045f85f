//! Estimation, pathology diagnosis and test-inversion inference for weakly
//! separated two-component normal mixtures with a known mixing weight.
//!
//! The generic types in [`mixture`] take any [`num::Real`] scalar;
//! the aliases below fix it to `f64`, which is what the estimators use.

pub mod error;
pub mod num;

pub use error::{Error, Result};
pub mod mixture;
pub mod estimators;
pub mod diagnostics;
pub mod inference;
pub mod prinstrat;
pub mod simlab;

pub type MixtureSpec = mixture::MixtureSpec<f64>;
pub type Sample = mixture::Sample<f64>;
pub type CumulantEstimates = mixture::CumulantEstimates<f64>;
pub type CumulantLaw = mixture::CumulantLaw<f64>;
pub type LawConstants = mixture::LawConstants<f64>;
