//! Seeded samplers for copula families whose tail dependence functions are
//! known in closed form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::Stream;
use crate::normal;
use crate::scalar::Scalar;
use crate::tdf::{grid_point, ParametricTdf, TailDependenceFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaFamily {
    Independence,
    Comonotone,
    Clayton { theta: f64 },
    /// Survival (rotated by 180°) Gumbel copula; lower tail dependent.
    GumbelSurvival { theta: f64 },
    Gaussian { rho: f64 },
}

impl CopulaFamily {
    fn check(&self) -> Result<()> {
        match *self {
            CopulaFamily::Clayton { theta } if !(theta > 0.0 && theta.is_finite()) => {
                Err(Error::parameter("theta", format!("Clayton needs theta > 0, got {theta}")))
            }
            CopulaFamily::GumbelSurvival { theta } if !(theta >= 1.0 && theta.is_finite()) => {
                Err(Error::parameter("theta", format!("Gumbel needs theta >= 1, got {theta}")))
            }
            CopulaFamily::Gaussian { rho } if !(-1.0..=1.0).contains(&rho) => {
                Err(Error::parameter("rho", format!("must lie in [-1, 1], got {rho}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    #[serde(flatten)]
    pub family: CopulaFamily,
    pub n: usize,
    pub seed: u64,
}

/// Draws `n` pairs in `(0, 1)²` from the copula. Identical specs give identical samples.
pub fn sample(spec: &CopulaSpec) -> Result<Vec<(f64, f64)>> {
    spec.family.check()?;
    let mut rng = Stream::new(spec.seed);
    let n = spec.n;
    let pairs = match spec.family {
        CopulaFamily::Independence => (0..n).map(|_| (rng.uniform(), rng.uniform())).collect(),
        CopulaFamily::Gaussian { rho: 1.0 } => comonotone(n, &mut rng),
        CopulaFamily::Comonotone => comonotone(n, &mut rng),
        CopulaFamily::Clayton { theta } => (0..n)
            .map(|_| {
                let (u, t) = (rng.uniform(), rng.uniform());
                (u, clayton_conditional_inverse(theta, u, t))
            })
            .collect(),
        CopulaFamily::GumbelSurvival { theta } => (0..n)
            .map(|_| survival_gumbel_pair(theta, &mut rng))
            .collect(),
        CopulaFamily::Gaussian { rho } => {
            let c = (1.0 - rho * rho).max(0.0).sqrt();
            (0..n)
                .map(|_| {
                    let (z1, z2) = (rng.normal(), rng.normal());
                    (normal::cdf(z1), normal::cdf(rho * z1 + c * z2))
                })
                .collect()
        }
    };
    Ok(pairs)
}

fn comonotone(n: usize, rng: &mut Stream) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let u = rng.uniform();
            (u, u)
        })
        .collect()
}

/// Solves `∂C/∂u (u, v) = t` for `v` under the Clayton copula.
fn clayton_conditional_inverse(theta: f64, u: f64, t: f64) -> f64 {
    let base = (t.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0;
    base.powf(-1.0 / theta)
}

/// Marshall–Olkin draw from the Gumbel copula: a positive stable frailty `S`
/// with Laplace transform `exp(-t^α)`, `α = 1/θ` (Kanter's representation),
/// and `U_i = exp(-(E_i / S)^α)`. Returns `(1 - U₁, 1 - U₂)`.
fn survival_gumbel_pair(theta: f64, rng: &mut Stream) -> (f64, f64) {
    let alpha = 1.0 / theta;
    let w = std::f64::consts::PI * rng.uniform();
    let e = rng.exponential();
    let s = if alpha == 1.0 {
        1.0
    } else {
        (alpha * w).sin() / w.sin().powf(1.0 / alpha)
            * (((1.0 - alpha) * w).sin() / e).powf((1.0 - alpha) / alpha)
    };
    // 1 - exp(-x) via expm1 keeps precision in the lower tail.
    let mut flip = || {
        let x = (rng.exponential() / s).powf(alpha);
        (-(-x).exp_m1()).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    };
    let u = flip();
    (u, flip())
}

/// Closed-form lower tail dependence function of the family on the grid.
pub fn analytic_tdf<T: Scalar>(spec: &CopulaSpec, m: usize) -> Result<TailDependenceFunction<T>> {
    spec.family.check()?;
    match spec.family {
        CopulaFamily::Independence => TailDependenceFunction::zero(m),
        CopulaFamily::Gaussian { rho } if rho < 1.0 => TailDependenceFunction::zero(m),
        CopulaFamily::Comonotone | CopulaFamily::Gaussian { .. } => {
            TailDependenceFunction::comonotone(m)
        }
        CopulaFamily::Clayton { theta } => ParametricTdf::Clayton { theta: T::lit(theta) }.to_grid(m),
        CopulaFamily::GumbelSurvival { theta } => {
            if m < 2 {
                return Err(Error::GridTooShort(m + 1));
            }
            let th = T::lit(theta);
            let values = (0..=m)
                .map(|i| {
                    let s: T = grid_point(i, m);
                    let r = T::one() - s;
                    // 1 - (s^θ + (1-s)^θ)^(1/θ), factored for accuracy near the ends.
                    let (lo, hi) = if s <= r { (s, r) } else { (r, s) };
                    if lo <= T::zero() {
                        return T::zero();
                    }
                    let norm = hi * (T::one() + (lo / hi).powf(th)).powf(th.recip());
                    (T::one() - norm).max(T::zero())
                })
                .collect();
            TailDependenceFunction::from_grid(values, true)
        }
    }
}

/// Writes pairs as two-column CSV with header `u,v`.
pub fn write_pairs_csv<W: Write>(pairs: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v"])?;
    for &(u, v) in pairs {
        w.write_record([u.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
