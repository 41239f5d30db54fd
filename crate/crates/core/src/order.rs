//! The tail dependence preorder: `Λ₁ ⪯ Λ₂` iff `Λ₁ ≤ Λ₂` pointwise.
//!
//! By homogeneity it suffices to compare on the simplex. Both functions are
//! piecewise linear, so their difference is extremal at the union of the two
//! grids' breakpoints; comparing there is exact even when grid sizes differ.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::tdf::{grid_point, TailDependenceFunction};

/// Default tolerance for comparing analytic TDFs.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Equal,
    Less,
    Greater,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OrderResult<T> {
    pub relation: Relation,
    /// Point where `Λ₁ > Λ₂ + tol` (so `Λ₁ ⪯ Λ₂` fails), at the largest excess.
    pub first_above_at: Option<T>,
    /// Point where `Λ₂ > Λ₁ + tol` (so `Λ₂ ⪯ Λ₁` fails), at the largest excess.
    pub second_above_at: Option<T>,
}

/// Compares two TDFs under the tail dependence order with absolute tolerance `tol`.
pub fn compare<T: Scalar>(
    first: &TailDependenceFunction<T>,
    second: &TailDependenceFunction<T>,
    tol: T,
) -> OrderResult<T> {
    let tol = tol.max(T::zero());
    // (largest Λ₁ - Λ₂, where), (largest Λ₂ - Λ₁, where)
    let mut up = (T::neg_infinity(), T::zero());
    let mut down = (T::neg_infinity(), T::zero());
    let mut visit = |s: T, a: T, b: T| {
        let d = a - b;
        if d > up.0 {
            up = (d, s);
        }
        if -d > down.0 {
            down = (-d, s);
        }
    };
    let (m1, m2) = (first.grid_size(), second.grid_size());
    if m1 == m2 {
        for (i, (&a, &b)) in first.values().iter().zip(second.values()).enumerate() {
            visit(grid_point(i, m1), a, b);
        }
    } else {
        for (i, &a) in first.values().iter().enumerate() {
            let s = grid_point(i, m1);
            visit(s, a, second.eval_unchecked(s));
        }
        for (j, &b) in second.values().iter().enumerate() {
            let s = grid_point(j, m2);
            visit(s, first.eval_unchecked(s), b);
        }
    }
    let first_above_at = (up.0 > tol).then_some(up.1);
    let second_above_at = (down.0 > tol).then_some(down.1);
    let relation = match (first_above_at.is_some(), second_above_at.is_some()) {
        (false, false) => Relation::Equal,
        (false, true) => Relation::Less,
        (true, false) => Relation::Greater,
        (true, true) => Relation::Incomparable,
    };
    OrderResult {
        relation,
        first_above_at,
        second_above_at,
    }
}
