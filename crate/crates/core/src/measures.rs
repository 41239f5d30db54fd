//! Measures of tail dependence: scalar functionals that are monotone in the
//! tail dependence order.
//!
//! Integrals of piecewise-linear grid functions use the trapezoid rule, which
//! is exact for them. Nonlinear integrands (`Λ^p`, `(2 - Λ)^-2`) use composite
//! Simpson on a 4× refinement of the grid; refinement points never straddle a
//! breakpoint, so each grid cell is integrated as a smooth function.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tdf::TailDependenceFunction;

/// Simpson refinement factor per grid cell; must be even.
const SIMPSON_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// The functional applied to `Λ` on the simplex as is.
    Raw,
    /// Twice the raw value, on the same `[0, 1]` scale as the tail dependence coefficient.
    #[default]
    Doubled,
}

impl Normalization {
    #[inline]
    pub fn apply<T: Scalar>(self, raw: T) -> T {
        match self {
            Normalization::Raw => raw,
            Normalization::Doubled => raw + raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureName<T> {
    /// `λ = 2 Λ(1/2)`
    Tdc,
    PointEval { s0: T },
    MaxTd,
    AvgTd,
    LpNorm { p: T },
    /// Spearman's rho of the induced extreme-value copula.
    SpearmanEv,
    /// `ε_L = λ / (2 - λ)`
    ExtremalDep,
    /// Output of [`combine`].
    Combined,
}

impl<T: Scalar> MeasureName<T> {
    pub fn key(&self) -> &'static str {
        match self {
            MeasureName::Tdc => "tdc",
            MeasureName::PointEval { .. } => "point_eval",
            MeasureName::MaxTd => "max_td",
            MeasureName::AvgTd => "avg_td",
            MeasureName::LpNorm { .. } => "lp_norm",
            MeasureName::SpearmanEv => "spearman_ev",
            MeasureName::ExtremalDep => "extremal_dep",
            MeasureName::Combined => "combined",
        }
    }

    fn params(&self) -> BTreeMap<String, T> {
        let mut params = BTreeMap::new();
        match *self {
            MeasureName::PointEval { s0 } => {
                params.insert("s0".to_owned(), s0);
            }
            MeasureName::LpNorm { p } => {
                params.insert("p".to_owned(), p);
            }
            _ => {}
        }
        params
    }

    fn from_parts(name: &str, params: &BTreeMap<String, T>) -> Result<Self> {
        let param = |key: &'static str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::parameter(key, format!("missing for measure {name}")))
        };
        Ok(match name {
            "tdc" => MeasureName::Tdc,
            "point_eval" => MeasureName::PointEval { s0: param("s0")? },
            "max_td" => MeasureName::MaxTd,
            "avg_td" => MeasureName::AvgTd,
            "lp_norm" => MeasureName::LpNorm { p: param("p")? },
            "spearman_ev" => MeasureName::SpearmanEv,
            "extremal_dep" => MeasureName::ExtremalDep,
            "combined" => MeasureName::Combined,
            other => return Err(Error::Data(format!("unknown measure name {other:?}"))),
        })
    }
}

/// A named measure value. Serialized as
/// `{"name": .., "params": {..}, "value": .., "normalization": "raw" | "doubled"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "MeasureRecord<T>",
    into = "MeasureRecord<T>",
    bound = "T: Scalar"
)]
pub struct MeasureValue<T> {
    pub name: MeasureName<T>,
    pub value: T,
    pub normalization: Normalization,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MeasureRecord<T> {
    name: String,
    params: BTreeMap<String, T>,
    value: T,
    normalization: Normalization,
}

impl<T: Scalar> From<MeasureValue<T>> for MeasureRecord<T> {
    fn from(m: MeasureValue<T>) -> Self {
        MeasureRecord {
            name: m.name.key().to_owned(),
            params: m.name.params(),
            value: m.value,
            normalization: m.normalization,
        }
    }
}

impl<T: Scalar> TryFrom<MeasureRecord<T>> for MeasureValue<T> {
    type Error = Error;

    fn try_from(r: MeasureRecord<T>) -> Result<Self> {
        Ok(MeasureValue {
            name: MeasureName::from_parts(&r.name, &r.params)?,
            value: r.value,
            normalization: r.normalization,
        })
    }
}

impl<T: Scalar> MeasureValue<T> {
    fn raw(name: MeasureName<T>, value: T) -> Self {
        MeasureValue {
            name,
            value,
            normalization: Normalization::Raw,
        }
    }
}

/// Tail dependence coefficient `λ = 2 Λ(1/2)`.
pub fn tdc<T: Scalar>(tdf: &TailDependenceFunction<T>) -> MeasureValue<T> {
    let half = tdf.eval_unchecked(T::lit(0.5));
    MeasureValue::raw(MeasureName::Tdc, half + half)
}

/// `Λ(s0)` for a fixed `s0 ∈ [0, 1]`.
pub fn point_eval<T: Scalar>(tdf: &TailDependenceFunction<T>, s0: T) -> Result<MeasureValue<T>> {
    Ok(MeasureValue::raw(MeasureName::PointEval { s0 }, tdf.eval(s0)?))
}

/// `max_s Λ(s)`; exact on the grid since the interpolant peaks at a grid point.
pub fn max_tail_dependence<T: Scalar>(
    tdf: &TailDependenceFunction<T>,
    normalization: Normalization,
) -> MeasureValue<T> {
    let max = tdf.values().iter().copied().fold(T::zero(), T::max);
    MeasureValue {
        name: MeasureName::MaxTd,
        value: normalization.apply(max),
        normalization,
    }
}

/// `∫ Λ(s) ds` by the trapezoid rule (exact for the interpolant).
pub fn average_tail_dependence<T: Scalar>(
    tdf: &TailDependenceFunction<T>,
    normalization: Normalization,
) -> MeasureValue<T> {
    let v = tdf.values();
    let m = tdf.grid_size();
    let ends = (v[0] + v[m]) * T::lit(0.5);
    let interior: T = v[1..m].iter().copied().sum();
    let integral = (interior + ends) / T::from_usize_exact(m);
    MeasureValue {
        name: MeasureName::AvgTd,
        value: normalization.apply(integral),
        normalization,
    }
}

/// Composite Simpson of `f(Λ(s))` over `[0, 1]` on the refined grid.
fn simpson<T: Scalar>(tdf: &TailDependenceFunction<T>, f: impl Fn(T) -> T) -> T {
    let v = tdf.values();
    let m = tdf.grid_size();
    let r = SIMPSON_REFINEMENT;
    let n = m * r;
    let rf = T::from_usize_exact(r);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let mut acc = T::zero();
    for j in 0..=n {
        let (i, k) = (j / r, j % r);
        let lam = if k == 0 {
            v[i]
        } else {
            let t = T::from_usize_exact(k) / rf;
            v[i] + t * (v[i + 1] - v[i])
        };
        let w = if j == 0 || j == n {
            T::one()
        } else if j % 2 == 1 {
            four
        } else {
            two
        };
        acc += w * f(lam);
    }
    acc / (T::lit(3.0) * T::from_usize_exact(n))
}

/// `(∫ Λ(s)^p ds)^(1/p)` for `1 ≤ p < ∞`.
pub fn lp_norm<T: Scalar>(
    tdf: &TailDependenceFunction<T>,
    p: T,
    normalization: Normalization,
) -> Result<MeasureValue<T>> {
    if !(p >= T::one() && p.is_finite()) {
        return Err(Error::parameter("p", format!("must satisfy 1 <= p < inf, got {p}")));
    }
    let integral = simpson(tdf, |lam| if lam > T::zero() { lam.powf(p) } else { T::zero() });
    let norm = if integral > T::zero() {
        integral.powf(p.recip())
    } else {
        T::zero()
    };
    Ok(MeasureValue {
        name: MeasureName::LpNorm { p },
        value: normalization.apply(norm),
        normalization,
    })
}

/// Frahm's extremal dependence coefficient `ε_L = λ / (2 - λ)`.
pub fn extremal_dependence_coefficient<T: Scalar>(
    tdf: &TailDependenceFunction<T>,
) -> MeasureValue<T> {
    let lambda = tdc(tdf).value;
    MeasureValue::raw(MeasureName::ExtremalDep, lambda / (T::lit(2.0) - lambda))
}

/// Extreme-value copula `C(u, v) = exp(log u + log v + Λ(-log u, -log v))`.
///
/// Returns 0 when either argument is 0.
pub fn ev_copula<T: Scalar>(tdf: &TailDependenceFunction<T>, u: T, v: T) -> Result<T> {
    if !(u >= T::zero() && u <= T::one()) {
        return Err(Error::domain("u", u.to_f64_lossy(), "[0, 1]"));
    }
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::domain("v", v.to_f64_lossy(), "[0, 1]"));
    }
    if u == T::zero() || v == T::zero() {
        return Ok(T::zero());
    }
    let (a, b) = (-u.ln(), -v.ln());
    Ok((tdf.extend_2d(a, b)? - a - b).exp())
}

/// Spearman's rho of the extreme-value copula: `12 ∫ (2 - Λ(s))^-2 ds - 3`.
pub fn spearman_ev<T: Scalar>(tdf: &TailDependenceFunction<T>) -> MeasureValue<T> {
    let two = T::lit(2.0);
    let integral = simpson(tdf, |lam| (two - lam).powi(-2));
    MeasureValue::raw(MeasureName::SpearmanEv, T::lit(12.0) * integral - T::lit(3.0))
}

/// Applies `f` to the measure values.
///
/// `f` must be increasing in each argument for the result to be a measure of
/// tail dependence; this is not checked.
pub fn combine<T: Scalar>(f: impl Fn(&[T]) -> T, parts: &[MeasureValue<T>]) -> MeasureValue<T> {
    let values: Vec<T> = parts.iter().map(|m| m.value).collect();
    MeasureValue::raw(MeasureName::Combined, f(&values))
}

/// Every measure above, evaluated once. Used by the CLI and for monotonicity checks.
pub fn all_measures<T: Scalar>(
    tdf: &TailDependenceFunction<T>,
    p: T,
    s0: T,
    normalization: Normalization,
) -> Result<Vec<MeasureValue<T>>> {
    Ok(vec![
        tdc(tdf),
        point_eval(tdf, s0)?,
        max_tail_dependence(tdf, normalization),
        average_tail_dependence(tdf, normalization),
        lp_norm(tdf, p, normalization)?,
        spearman_ev(tdf),
        extremal_dependence_coefficient(tdf),
    ])
}
