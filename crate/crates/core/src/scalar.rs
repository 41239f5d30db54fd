//! Scalar abstraction for the numerical core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the tail dependence machinery is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every finite `f64` maps to some value of `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Absolute slack for admissibility checks (bounds, concavity).
    ///
    /// `1e-9` in double precision; scaled up with the machine epsilon for
    /// narrower types so that rounding of exact concave functions never trips it.
    #[inline]
    fn admissibility_tol() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Pivot/optimality tolerance of the simplex solver.
    #[inline]
    fn solver_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon().sqrt() * Self::lit(0.1))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_scale_with_precision() {
        assert_eq!(f64::admissibility_tol(), 1e-9);
        assert!(f32::admissibility_tol() > 1e-6);
        assert!(f64::solver_tol() <= 1e-8);
    }
}
