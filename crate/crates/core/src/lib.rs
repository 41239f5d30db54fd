//! Tail dependence functions of bivariate copulas.
//!
//! A tail dependence function (TDF) `Λ(s)` on `[0, 1]` is stored on a uniform
//! grid and interpolated linearly. The crate provides validation and concave
//! projection, monotone dependence measures, the tail dependence preorder,
//! a rank-based estimator, feasible ranges of measures under constraints, copula
//! samplers, and the rolling-window pipeline behind the `taildep` binary.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the pipeline uses.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod estimator;
mod lp;
pub mod measures;
pub mod normal;
pub mod order;
pub mod pipeline;
pub mod random;
pub mod scalar;
pub mod simulate;
pub mod tdf;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tdf::{ParametricTdf, TailDependenceFunction, TdfKind, ValidationReport};

/// Double-precision TDF.
pub type Tdf = TailDependenceFunction<f64>;
/// Single-precision TDF.
pub type Tdf32 = TailDependenceFunction<f32>;
pub type MeasureValue = measures::MeasureValue<f64>;
pub type MeasureName = measures::MeasureName<f64>;
pub type OrderResult = order::OrderResult<f64>;
