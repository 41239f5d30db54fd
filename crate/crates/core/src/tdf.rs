//! Lower tail dependence functions restricted to the unit simplex.
//!
//! A tail dependence function `Λ(x, y)` is homogeneous of order one, so it is
//! determined by its values on the segment `{(s, 1 - s) : s ∈ [0, 1]}`. This
//! module stores that restriction on a uniform grid `s_i = i / m` and treats
//! it as the piecewise-linear interpolant of the grid values.
//!
//! Admissible functions satisfy `0 ≤ Λ(s) ≤ min(s, 1 - s)` and are concave.
//! Raw nonparametric estimates need not be concave at finite sample sizes;
//! they are kept as [`TdfKind::Empirical`] and can be projected with
//! [`TailDependenceFunction::concave_majorant`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Whether concavity was enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdfKind {
    Validated,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    NonNegative,
    /// `Λ(s) ≤ min(s, 1 - s)`; covers the zero boundary values.
    FrechetBound,
    Concavity,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::NonNegative => "non-negativity",
            Constraint::FrechetBound => "Fréchet bound",
            Constraint::Concavity => "concavity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub index: usize,
    /// Amount by which the constraint is exceeded.
    pub magnitude: f64,
}

/// Outcome of checking grid values against the admissibility constraints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        let shown = self.violations.len().min(5);
        for (n, v) in self.violations[..shown].iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} violated at index {} by {:e}", v.constraint, v.index, v.magnitude)?;
        }
        if self.violations.len() > shown {
            write!(f, "; and {} more", self.violations.len() - shown)?;
        }
        Ok(())
    }
}

/// Upper Fréchet bound `min(s_i, 1 - s_i)` at grid index `i`, computed without
/// rounding asymmetry between `i` and `m - i`.
#[inline]
pub(crate) fn frechet_bound<T: Scalar>(i: usize, m: usize) -> T {
    T::from_usize_exact(i.min(m - i)) / T::from_usize_exact(m)
}

#[inline]
pub(crate) fn grid_point<T: Scalar>(i: usize, m: usize) -> T {
    T::from_usize_exact(i) / T::from_usize_exact(m)
}

/// Checks grid values against the admissibility constraints.
///
/// Concavity is only checked when `check_concavity` is set. Values must be finite.
pub fn validate<T: Scalar>(values: &[T], check_concavity: bool) -> ValidationReport {
    let tol = T::admissibility_tol();
    let m = values.len().saturating_sub(1);
    let mut violations = Vec::new();
    if m == 0 {
        return ValidationReport { violations };
    }
    for (i, &v) in values.iter().enumerate() {
        if v < -tol {
            violations.push(Violation {
                constraint: Constraint::NonNegative,
                index: i,
                magnitude: (-v).to_f64_lossy(),
            });
        }
        let excess = v - frechet_bound::<T>(i, m);
        if excess > tol {
            violations.push(Violation {
                constraint: Constraint::FrechetBound,
                index: i,
                magnitude: excess.to_f64_lossy(),
            });
        }
    }
    if check_concavity {
        for i in 1..m {
            let second = values[i + 1] - (values[i] + values[i]) + values[i - 1];
            if second > tol {
                violations.push(Violation {
                    constraint: Constraint::Concavity,
                    index: i,
                    magnitude: second.to_f64_lossy(),
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Tail dependence function on the unit simplex, stored on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "TdfRecord<T>",
    into = "TdfRecord<T>",
    bound = "T: Scalar"
)]
pub struct TailDependenceFunction<T> {
    values: Vec<T>,
    kind: TdfKind,
}

/// Wire format: `{"m": .., "values": [..], "kind": "validated" | "empirical"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct TdfRecord<T> {
    m: usize,
    values: Vec<T>,
    kind: TdfKind,
}

impl<T: Scalar> TryFrom<TdfRecord<T>> for TailDependenceFunction<T> {
    type Error = Error;

    fn try_from(rec: TdfRecord<T>) -> Result<Self> {
        if rec.values.len() != rec.m + 1 {
            return Err(Error::Data(format!(
                "m = {} but {} values given",
                rec.m,
                rec.values.len()
            )));
        }
        Self::from_grid(rec.values, rec.kind == TdfKind::Validated)
    }
}

impl<T: Scalar> From<TailDependenceFunction<T>> for TdfRecord<T> {
    fn from(tdf: TailDependenceFunction<T>) -> Self {
        TdfRecord {
            m: tdf.grid_size(),
            values: tdf.values,
            kind: tdf.kind,
        }
    }
}

impl<T: Scalar> TailDependenceFunction<T> {
    /// Builds a TDF from grid values `Λ(i / m)`, `i = 0..=m`.
    ///
    /// With `enforce_concavity` the result is [`TdfKind::Validated`]; otherwise
    /// only the bounds are checked and the result is [`TdfKind::Empirical`].
    /// Values within tolerance of a bound are snapped onto it and the endpoints
    /// are set to exactly zero.
    pub fn from_grid(values: Vec<T>, enforce_concavity: bool) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::GridTooShort(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let report = validate(&values, enforce_concavity);
        if !report.is_valid() {
            return Err(Error::Inadmissible(report));
        }
        let m = values.len() - 1;
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            *v = v.max(T::zero()).min(frechet_bound(i, m));
        }
        values[0] = T::zero();
        values[m] = T::zero();
        let kind = if enforce_concavity {
            TdfKind::Validated
        } else {
            TdfKind::Empirical
        };
        Ok(Self { values, kind })
    }

    /// The identically zero function (tail independence).
    pub fn zero(m: usize) -> Result<Self> {
        Self::from_grid(vec![T::zero(); m + 1], true)
    }

    /// `min(s, 1 - s)`, the comonotone (upper Fréchet) function.
    pub fn comonotone(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::GridTooShort(m + 1));
        }
        Self::from_grid((0..=m).map(|i| frechet_bound(i, m)).collect(), true)
    }

    /// Number of grid intervals `m`.
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> TdfKind {
        self.kind
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn grid_point(&self, i: usize) -> T {
        grid_point(i, self.grid_size())
    }

    /// `Λ(s)` by linear interpolation; exact at grid points.
    pub fn eval(&self, s: T) -> Result<T> {
        if !(s >= T::zero() && s <= T::one()) {
            return Err(Error::domain("s", s.to_f64_lossy(), "[0, 1]"));
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: T) -> T {
        let m = self.grid_size();
        let pos = s * T::from_usize_exact(m);
        let i = pos.floor().to_usize().unwrap_or(0).min(m - 1);
        let frac = pos - T::from_usize_exact(i);
        let (a, b) = (self.values[i], self.values[i + 1]);
        a + frac * (b - a)
    }

    /// `Λ(x, y) = (x + y) Λ(x / (x + y))`, the homogeneous extension to the quadrant.
    pub fn extend_2d(&self, x: T, y: T) -> Result<T> {
        if !(x >= T::zero()) || !x.is_finite() {
            return Err(Error::domain("x", x.to_f64_lossy(), "[0, ∞)"));
        }
        if !(y >= T::zero()) || !y.is_finite() {
            return Err(Error::domain("y", y.to_f64_lossy(), "[0, ∞)"));
        }
        let total = x + y;
        if total == T::zero() {
            return Ok(T::zero());
        }
        let s = (x / total).min(T::one());
        Ok(total * self.eval_unchecked(s))
    }

    /// True if `values[i] == values[m - i]` within `tol` for all `i`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let m = self.grid_size();
        (0..=m / 2).all(|i| (self.values[i] - self.values[m - i]).abs() <= tol)
    }

    /// Pointwise multiple `c · Λ` for `c ∈ [0, 1]`; keeps the kind.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c >= T::zero() && c <= T::one()) {
            return Err(Error::domain("scale", c.to_f64_lossy(), "[0, 1]"));
        }
        Self::from_grid(
            self.values.iter().map(|&v| v * c).collect(),
            self.kind == TdfKind::Validated,
        )
    }

    /// Smallest concave function dominating the grid values, clipped at
    /// `min(s, 1 - s)`. The result is [`TdfKind::Validated`].
    pub fn concave_majorant(&self) -> Result<Self> {
        let m = self.grid_size();
        let hull = upper_hull(&self.values);
        let mut out = vec![T::zero(); m + 1];
        for seg in hull.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let (va, vb) = (self.values[a], self.values[b]);
            out[a] = va;
            let width = T::from_usize_exact(b - a);
            for (j, o) in out.iter_mut().enumerate().take(b).skip(a + 1) {
                let t = T::from_usize_exact(j - a) / width;
                *o = va + t * (vb - va);
            }
        }
        out[m] = self.values[m];
        for (i, v) in out.iter_mut().enumerate() {
            *v = v.min(frechet_bound(i, m));
        }
        Self::from_grid(out, true)
    }
}

/// Indices of the vertices of the upper convex hull of `(i, values[i])`,
/// left to right (Andrew's monotone chain, upper half). Points within rounding
/// of a chord are kept, so a concave input is its own hull.
fn upper_hull<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(values.len());
    let scale = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let slack = T::epsilon() * T::lit(8.0) * scale;
    for i in 0..values.len() {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            // cross((a - o), (i - o)) > 0 means a lies strictly below the chord o–i.
            let cross = T::from_usize_exact(a - o) * (values[i] - values[o])
                - (values[a] - values[o]) * T::from_usize_exact(i - o);
            if cross > slack * T::from_usize_exact(i - o) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Parametric tail dependence functions with closed forms on the simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParametricTdf<T> {
    /// `min(s, 1 - s)`
    Comonotone,
    /// `0`
    Independence,
    /// `(s^-θ + (1 - s)^-θ)^(-1/θ)`, the lower TDF of the Clayton copula.
    Clayton { theta: T },
    /// `min(a s, b (1 - s))`, clipped at `min(s, 1 - s)`.
    Tent { a: T, b: T },
    /// `c · s (1 - s)` with `c ∈ (0, 1]`.
    Parabola { c: T },
}

impl<T: Scalar> ParametricTdf<T> {
    fn check(&self) -> Result<()> {
        match *self {
            ParametricTdf::Clayton { theta } if !(theta > T::zero() && theta.is_finite()) => {
                Err(Error::parameter("theta", format!("must be > 0, got {theta}")))
            }
            ParametricTdf::Tent { a, .. } if !(a > T::zero() && a.is_finite()) => {
                Err(Error::parameter("a", format!("must be > 0, got {a}")))
            }
            ParametricTdf::Tent { b, .. } if !(b > T::zero() && b.is_finite()) => {
                Err(Error::parameter("b", format!("must be > 0, got {b}")))
            }
            ParametricTdf::Parabola { c } if !(c > T::zero() && c <= T::one()) => {
                Err(Error::parameter("c", format!("must lie in (0, 1], got {c}")))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form value at `s ∈ [0, 1]`.
    pub fn value_at(&self, s: T) -> T {
        self.value_at_split(s, T::one() - s)
    }

    /// Same as [`value_at`](Self::value_at) with `r = 1 - s` supplied, so grid
    /// points use the exactly rounded `(m - i) / m`.
    fn value_at_split(&self, s: T, r: T) -> T {
        let one = T::one();
        match *self {
            ParametricTdf::Comonotone => s.min(r),
            ParametricTdf::Independence => T::zero(),
            ParametricTdf::Clayton { theta } => {
                if s <= T::zero() || r <= T::zero() {
                    return T::zero();
                }
                // Factor out the smaller argument so the power never overflows.
                let (lo, hi) = if s <= r { (s, r) } else { (r, s) };
                lo * (one + (lo / hi).powf(theta)).powf(-one / theta)
            }
            ParametricTdf::Tent { a, b } => (a * s).min(b * r).min(s).min(r),
            ParametricTdf::Parabola { c } => c * s * r,
        }
    }

    /// Samples the family on the grid `i / m`.
    pub fn to_grid(&self, m: usize) -> Result<TailDependenceFunction<T>> {
        self.check()?;
        if m < 2 {
            return Err(Error::GridTooShort(m + 1));
        }
        let values = (0..=m)
            .map(|i| self.value_at_split(grid_point(i, m), grid_point(m - i, m)))
            .collect();
        TailDependenceFunction::from_grid(values, true)
    }
}

/// Grid sampling of a parametric family; see [`ParametricTdf`].
pub fn from_parametric<T: Scalar>(
    family: ParametricTdf<T>,
    grid_size: usize,
) -> Result<TailDependenceFunction<T>> {
    family.to_grid(grid_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Tdf = TailDependenceFunction<f64>;

    #[test]
    fn small_tent_is_valid() {
        let t = Tdf::from_grid(vec![0.0, 0.25, 0.0], true).unwrap();
        assert_eq!(t.kind(), TdfKind::Validated);
        assert_eq!(t.eval(0.5).unwrap(), 0.25);
    }

    #[test]
    fn frechet_violation_is_reported() {
        let err = Tdf::from_grid(vec![0.0, 0.6, 0.0], true).unwrap_err();
        let Error::Inadmissible(report) = err else {
            panic!("expected report, got {err:?}");
        };
        assert!(!report.is_valid());
        assert_eq!(report.violations[0].constraint, Constraint::FrechetBound);
        assert_eq!(report.violations[0].index, 1);
        assert!((report.violations[0].magnitude - 0.1).abs() < 1e-12);
    }

    #[test]
    fn parabola_second_differences_are_negative() {
        let m = 200;
        let values: Vec<f64> = (0..=m)
            .map(|i| {
                let s = i as f64 / m as f64;
                s * (1.0 - s)
            })
            .collect();
        for i in 1..m {
            let d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
            assert!((d2 + 2.0 / (m * m) as f64).abs() < 1e-12);
        }
        let t = Tdf::from_grid(values, true).unwrap();
        assert_eq!(t.kind(), TdfKind::Validated);
    }

    #[test]
    fn rejects_non_finite_and_negative() {
        assert!(matches!(
            Tdf::from_grid(vec![0.0, f64::NAN, 0.0], false),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            Tdf::from_grid(vec![0.0, -0.1, 0.0], false),
            Err(Error::Inadmissible(_))
        ));
        assert!(matches!(
            Tdf::from_grid(vec![0.0, 0.1], false),
            Err(Error::GridTooShort(2))
        ));
    }

    #[test]
    fn empirical_skips_concavity() {
        let v = vec![0.0, 0.1, 0.0, 0.1, 0.0];
        assert!(Tdf::from_grid(v.clone(), true).is_err());
        let t = Tdf::from_grid(v, false).unwrap();
        assert_eq!(t.kind(), TdfKind::Empirical);
    }

    #[test]
    fn tiny_rounding_is_snapped() {
        let t = Tdf::from_grid(vec![1e-12, 0.5 + 1e-12, -1e-12], true).unwrap();
        assert_eq!(t.values(), &[0.0, 0.5, 0.0]);
    }

    #[test]
    fn eval_examples() {
        let c = Tdf::comonotone(200).unwrap();
        assert_eq!(c.eval(0.5).unwrap(), 0.5);
        let z = Tdf::zero(10).unwrap();
        for s in [0.0, 0.13, 0.5, 1.0] {
            assert_eq!(z.eval(s).unwrap(), 0.0);
        }
        let p: Tdf = from_parametric(ParametricTdf::Parabola { c: 1.0 }, 200).unwrap();
        assert_eq!(p.eval(0.25).unwrap(), 0.1875);
        assert!(p.eval(-0.01).is_err());
        assert!(p.eval(1.01).is_err());
        assert!(p.eval(f64::NAN).is_err());
    }

    #[test]
    fn extend_2d_examples() {
        let c = Tdf::comonotone(200).unwrap();
        assert_eq!(c.extend_2d(2.0, 2.0).unwrap(), 2.0);
        assert_eq!(c.extend_2d(0.0, 0.0).unwrap(), 0.0);
        // xy/(x+y) at (1, 2) = 2/3; s = 1/3 is not a grid point of m = 200,
        // so the interpolation error enters.
        let clayton: Tdf = from_parametric(ParametricTdf::Clayton { theta: 1.0 }, 300).unwrap();
        assert!((clayton.extend_2d(1.0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let clayton: Tdf = from_parametric(ParametricTdf::Clayton { theta: 1.0 }, 200).unwrap();
        assert!((clayton.extend_2d(1.0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-4);
        assert!(c.extend_2d(-1.0, 1.0).is_err());
        assert!(c.extend_2d(1.0, -1.0).is_err());
    }

    #[test]
    fn parametric_examples() {
        let clayton: Tdf = from_parametric(ParametricTdf::Clayton { theta: 1.0 }, 200).unwrap();
        assert_eq!(clayton.eval(0.5).unwrap(), 0.25);
        let ind = from_parametric(ParametricTdf::<f64>::Independence, 50).unwrap();
        assert!(ind.values().iter().all(|&v| v == 0.0));
        let tent: Tdf = from_parametric(ParametricTdf::Tent { a: 1.0, b: 1.0 }, 200).unwrap();
        assert_eq!(tent, Tdf::comonotone(200).unwrap());
    }

    #[test]
    fn clayton_center_matches_closed_form() {
        for theta in [0.5, 1.0, 2.0, 5.0] {
            let t: Tdf = from_parametric(ParametricTdf::Clayton { theta }, 200).unwrap();
            let expected = 2f64.powf(-1.0 / theta) / 2.0;
            assert!((t.eval(0.5).unwrap() - expected).abs() < 1e-15, "theta {theta}");
        }
    }

    #[test]
    fn clayton_large_theta_approaches_comonotone() {
        let t: Tdf = from_parametric(ParametricTdf::Clayton { theta: 200.0 }, 100).unwrap();
        let c = Tdf::comonotone(100).unwrap();
        for (a, b) in t.values().iter().zip(c.values()) {
            assert!((a - b).abs() < 0.01);
        }
    }

    #[test]
    fn parametric_rejects_bad_parameters() {
        assert!(from_parametric(ParametricTdf::Clayton { theta: 0.0 }, 10).is_err());
        assert!(from_parametric(ParametricTdf::Clayton { theta: -1.0 }, 10).is_err());
        assert!(from_parametric(ParametricTdf::Tent { a: 0.0, b: 1.0 }, 10).is_err());
        assert!(from_parametric(ParametricTdf::Tent { a: 1.0, b: -2.0 }, 10).is_err());
        assert!(from_parametric(ParametricTdf::Parabola { c: 0.0 }, 10).is_err());
        assert!(from_parametric(ParametricTdf::Parabola { c: 1.5 }, 10).is_err());
    }

    #[test]
    fn majorant_hand_example() {
        let t = Tdf::from_grid(vec![0.0, 0.1, 0.0, 0.1, 0.0], false).unwrap();
        let h = t.concave_majorant().unwrap();
        assert_eq!(h.kind(), TdfKind::Validated);
        let expected = [0.0, 0.1, 0.1, 0.1, 0.0];
        for (a, b) in h.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn majorant_of_concave_and_zero() {
        let p: Tdf = from_parametric(ParametricTdf::Parabola { c: 0.7 }, 64).unwrap();
        let h = p.concave_majorant().unwrap();
        for (a, b) in h.values().iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let z = Tdf::zero(8).unwrap();
        assert_eq!(z.concave_majorant().unwrap(), z);
    }

    #[test]
    fn json_shape_and_round_trip() {
        let t: Tdf = from_parametric(ParametricTdf::Clayton { theta: 1.7 }, 7).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.starts_with("{\"m\":7,\"values\":[0.0,"));
        assert!(json.ends_with("\"kind\":\"validated\"}"));
        let back: Tdf = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);

        let bad = r#"{"m":3,"values":[0,0.1,0],"kind":"empirical"}"#;
        assert!(serde_json::from_str::<Tdf>(bad).is_err());
        let inadmissible = r#"{"m":2,"values":[0,0.9,0],"kind":"empirical"}"#;
        assert!(serde_json::from_str::<Tdf>(inadmissible).is_err());
    }

    #[test]
    fn single_precision_works() {
        let t = from_parametric(ParametricTdf::Clayton { theta: 2.0f32 }, 200).unwrap();
        assert!((t.eval(0.5).unwrap() - 0.353_553_4).abs() < 1e-6);
        let h = t.concave_majorant().unwrap();
        assert_eq!(h.kind(), TdfKind::Validated);
    }
}
