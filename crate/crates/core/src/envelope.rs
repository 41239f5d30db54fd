//! Feasible ranges of measures over all admissible TDFs that satisfy a set of
//! pinned values.
//!
//! The admissible set is discretized on the grid `i/m`: variables `Λ_1..Λ_{m-1}`
//! (the endpoints are zero), bounds `0 ≤ Λ_i ≤ min(i, m-i)/m`, and
//! nonpositive second differences. Pins fix single variables. Because
//! piecewise-linear functions on the grid form a subset of all admissible
//! functions, reported ranges approximate the continuous ones from inside, to
//! a resolution of about `2/m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Problem, Row, Simplex};
use crate::measures::{average_tail_dependence, max_tail_dependence, Normalization};
use crate::random::Stream;
use crate::scalar::Scalar;
use crate::tdf::{frechet_bound, TailDependenceFunction};

/// Vertices mixed per draw in [`FeasibleSampler::draw`].
const MIXTURE_VERTICES: usize = 4;

/// A pinned value `Λ(s) = value` at a grid point `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Pin<T> {
    pub s: T,
    pub value: T,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PinSet<T> {
    pub pins: Vec<Pin<T>>,
}

impl<T: Scalar> PinSet<T> {
    pub fn new() -> Self {
        PinSet { pins: Vec::new() }
    }

    pub fn with(mut self, s: T, value: T) -> Self {
        self.pins.push(Pin { s, value });
        self
    }

    /// The single pin `Λ(1/2) = λ/2` that fixes the tail dependence coefficient.
    pub fn tdc(lambda: T) -> Self {
        Self::new().with(T::lit(0.5), lambda * T::lit(0.5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case", bound = "T: Scalar")]
pub enum EnvelopeMeasure<T> {
    MaxTd,
    AvgTd,
    /// `Λ(s0)`; always reported raw.
    PointEval { s0: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EnvelopeResult<T> {
    #[serde(rename = "min")]
    pub min_value: T,
    #[serde(rename = "max")]
    pub max_value: T,
    pub argmin: TailDependenceFunction<T>,
    pub argmax: TailDependenceFunction<T>,
}

/// The discretized admissible set under a pin set. Construction solves a
/// phase-one problem, so an existing value is known to be nonempty.
#[derive(Debug, Clone)]
pub struct FeasiblePolytope<T> {
    m: usize,
    /// Pinned value per grid index `0..=m`.
    fixed: Vec<Option<T>>,
    problem: Problem<T>,
    solver: Simplex<T>,
}

/// Builds the constraint system for `pins` on a grid of size `m`.
pub fn feasible_polytope<T: Scalar>(pins: &PinSet<T>, m: usize) -> Result<FeasiblePolytope<T>> {
    if m < 2 {
        return Err(Error::GridTooShort(m + 1));
    }
    let tol = T::admissibility_tol();
    let mut fixed: Vec<Option<T>> = vec![None; m + 1];
    fixed[0] = Some(T::zero());
    fixed[m] = Some(T::zero());
    let mf = T::from_usize_exact(m);
    for pin in &pins.pins {
        if !(pin.s >= T::zero() && pin.s <= T::one()) || !pin.value.is_finite() {
            return Err(Error::domain("pin location", pin.s.to_f64_lossy(), "[0, 1]"));
        }
        let pos = pin.s * mf;
        let i = pos.round();
        if (pos - i).abs() > tol * mf {
            return Err(Error::parameter("pin", format!("s = {} is not a point of the grid 1/{m}", pin.s)));
        }
        let i = i.to_usize().expect("index in range");
        let bound: T = frechet_bound(i, m);
        if pin.value < -tol || pin.value > bound + tol {
            return Err(Error::Infeasible(format!(
                "pin Λ({}) = {} violates 0 ≤ Λ ≤ {bound}",
                pin.s, pin.value
            )));
        }
        let v = pin.value.max(T::zero()).min(bound);
        match fixed[i] {
            Some(w) if (w - v).abs() > tol => {
                return Err(Error::Infeasible(format!("conflicting pins at s = {}", pin.s)));
            }
            _ => fixed[i] = Some(v),
        }
    }

    // Variable k stands for Λ_{k+1}.
    let n = m - 1;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for (i, slot) in fixed.iter().enumerate().take(m).skip(1) {
        match *slot {
            Some(v) => {
                lower.push(v);
                upper.push(v);
            }
            None => {
                lower.push(T::zero());
                upper.push(frechet_bound(i, m));
            }
        }
    }
    let two = T::lit(2.0);
    let rows = (1..m)
        .map(|i| {
            let mut coefs = vec![(i - 1, -two)];
            if i > 1 {
                coefs.push((i - 2, T::one()));
            }
            if i + 1 < m {
                coefs.push((i, T::one()));
            }
            Row { coefs, rhs: T::zero() }
        })
        .collect();
    let problem = Problem { lower, upper, rows };
    let solver = Simplex::new(&problem)?;
    Ok(FeasiblePolytope {
        m,
        fixed,
        problem,
        solver,
    })
}

impl<T: Scalar> FeasiblePolytope<T> {
    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// Some feasible point (the basic solution left by phase one).
    pub fn feasible_point(&self) -> Result<TailDependenceFunction<T>> {
        self.to_tdf(self.solver.solution())
    }

    fn to_tdf(&self, interior: &[T]) -> Result<TailDependenceFunction<T>> {
        let mut values = Vec::with_capacity(self.m + 1);
        values.push(T::zero());
        values.extend_from_slice(&interior[..self.m - 1]);
        values.push(T::zero());
        TailDependenceFunction::from_grid(values, true)
    }

    /// Maximizes and minimizes a linear objective on the interior variables.
    fn linear_range(&self, c: &[T]) -> Result<(TailDependenceFunction<T>, TailDependenceFunction<T>)> {
        let mut lp = self.solver.clone();
        lp.maximize(c)?;
        let argmax = self.to_tdf(lp.solution())?;
        let neg: Vec<T> = c.iter().map(|&v| -v).collect();
        lp.maximize(&neg)?;
        let argmin = self.to_tdf(lp.solution())?;
        Ok((argmin, argmax))
    }

    /// Largest attainable `max_i Λ_i`: one LP per coordinate, warm-started,
    /// skipping coordinates whose bound cannot beat the incumbent.
    fn max_of_max(&self) -> Result<TailDependenceFunction<T>> {
        let m = self.m;
        let mut lp = self.solver.clone();
        let mut best = self.to_tdf(lp.solution())?;
        let mut best_value = best.values().iter().copied().fold(T::zero(), T::max);
        // Visit coordinates from the middle outwards, where bounds are largest.
        let mut order: Vec<usize> = (1..m).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(i.min(m - i)));
        let mut c = vec![T::zero(); m - 1];
        for i in order {
            let bound: T = frechet_bound(i, m);
            if self.fixed[i].is_some() || bound <= best_value + T::solver_tol() {
                continue;
            }
            c[i - 1] = T::one();
            let v = lp.maximize(&c)?;
            c[i - 1] = T::zero();
            if v > best_value {
                best = self.to_tdf(lp.solution())?;
                best_value = best.values().iter().copied().fold(T::zero(), T::max);
            }
        }
        Ok(best)
    }

    /// Smallest attainable `max_i Λ_i`: minimize `t` subject to `Λ_i ≤ t`.
    fn min_of_max(&self) -> Result<TailDependenceFunction<T>> {
        let n = self.m - 1;
        let floor = self.fixed.iter().flatten().copied().fold(T::zero(), T::max);
        let mut problem = self.problem.clone();
        problem.lower.push(floor);
        problem.upper.push(T::lit(0.5));
        problem
            .rows
            .extend((0..n).map(|k| Row { coefs: vec![(k, T::one()), (n, -T::one())], rhs: T::zero() }));
        let mut lp = Simplex::new(&problem)?;
        let mut c = vec![T::zero(); n + 1];
        c[n] = -T::one();
        lp.maximize(&c)?;
        self.to_tdf(lp.solution())
    }
}

/// Attainable range of `measure` over the admissible TDFs satisfying `pins`.
///
/// `MaxTd` and `AvgTd` are scaled by `normalization`; `PointEval` is raw.
/// The bounds are recomputed from the attaining grid functions, so
/// `measure(argmin) = min_value` and `measure(argmax) = max_value` exactly.
pub fn measure_range<T: Scalar>(
    pins: &PinSet<T>,
    measure: EnvelopeMeasure<T>,
    m: usize,
    normalization: Normalization,
) -> Result<EnvelopeResult<T>> {
    if let EnvelopeMeasure::PointEval { s0 } = measure {
        if !(s0 >= T::zero() && s0 <= T::one()) {
            return Err(Error::domain("s0", s0.to_f64_lossy(), "[0, 1]"));
        }
    }
    let poly = feasible_polytope(pins, m)?;
    let (argmin, argmax) = match measure {
        EnvelopeMeasure::MaxTd => (poly.min_of_max()?, poly.max_of_max()?),
        EnvelopeMeasure::AvgTd => {
            let w = T::one() / T::from_usize_exact(m);
            poly.linear_range(&vec![w; m - 1])?
        }
        EnvelopeMeasure::PointEval { s0 } => {
            let mut c = vec![T::zero(); m + 1];
            let pos = s0 * T::from_usize_exact(m);
            let k = pos.floor().to_usize().unwrap_or(0).min(m - 1);
            let w = pos - T::from_usize_exact(k);
            c[k] += T::one() - w;
            c[k + 1] += w;
            poly.linear_range(&c[1..m])?
        }
    };
    let value = |t: &TailDependenceFunction<T>| match measure {
        EnvelopeMeasure::MaxTd => max_tail_dependence(t, normalization).value,
        EnvelopeMeasure::AvgTd => average_tail_dependence(t, normalization).value,
        EnvelopeMeasure::PointEval { s0 } => t.eval_unchecked(s0),
    };
    let (min_value, max_value) = (value(&argmin), value(&argmax));
    Ok(EnvelopeResult {
        min_value: min_value.min(max_value),
        max_value,
        argmin,
        argmax,
    })
}

/// Closed-form range of `max_s Λ(s)` given the tail dependence coefficient `λ`:
/// `[λ/2, λ/(1+λ)]` raw, twice that doubled.
///
/// The lower end is `Λ(1/2)` itself. The upper end follows from concavity: the
/// chord from `(1/2, λ/2)` to `(1, 0)` gives `Λ(s) ≤ λ(1-s)` for `s < 1/2`,
/// which meets `Λ(s) ≤ s` at `s = λ/(1+λ)`.
pub fn linf_range_given_tdc<T: Scalar>(lambda: T, normalization: Normalization) -> Result<(T, T)> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::domain("tdc", lambda.to_f64_lossy(), "[0, 1]"));
    }
    let lo = lambda * T::lit(0.5);
    let hi = lambda / (T::one() + lambda);
    Ok((normalization.apply(lo), normalization.apply(hi)))
}

/// Draws random feasible points as mixtures of polytope vertices.
///
/// Phase one runs once; every draw clones that basis, walks to
/// [`MIXTURE_VERTICES`] vertices maximizing Gaussian random objectives, and mixes
/// them with flat Dirichlet weights.
#[derive(Debug, Clone)]
pub struct FeasibleSampler<T> {
    poly: FeasiblePolytope<T>,
}

impl<T: Scalar> FeasibleSampler<T> {
    pub fn new(pins: &PinSet<T>, m: usize) -> Result<Self> {
        Ok(FeasibleSampler {
            poly: feasible_polytope(pins, m)?,
        })
    }

    pub fn draw(&self, seed: u64) -> Result<TailDependenceFunction<T>> {
        let n = self.poly.m - 1;
        let mut rng = Stream::new(seed);
        let mut lp = self.poly.solver.clone();
        let mut mix = vec![T::zero(); n];
        let mut total = T::zero();
        let mut c = vec![T::zero(); n];
        for _ in 0..MIXTURE_VERTICES {
            c.iter_mut().for_each(|v| *v = T::lit(rng.normal()));
            lp.maximize(&c)?;
            let w = T::lit(rng.exponential());
            total += w;
            for (acc, &x) in mix.iter_mut().zip(lp.solution()) {
                *acc += w * x;
            }
        }
        mix.iter_mut().for_each(|v| *v /= total);
        // Pinned coordinates are fixed by their bounds; restore them exactly.
        for (k, v) in mix.iter_mut().enumerate() {
            if let Some(p) = self.poly.fixed[k + 1] {
                *v = p;
            }
        }
        self.poly.to_tdf(&mix)
    }
}

/// A random admissible TDF satisfying `pins`; deterministic in `seed`.
pub fn random_feasible<T: Scalar>(
    pins: &PinSet<T>,
    m: usize,
    seed: u64,
) -> Result<TailDependenceFunction<T>> {
    FeasibleSampler::new(pins, m)?.draw(seed)
}
