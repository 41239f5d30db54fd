//! Random admissible TDFs for the integration tests.

#![allow(dead_code)]

use taildep::random::Stream;
use taildep::{ParametricTdf, Tdf};

/// `min(a s, b (1 - s))` clipped at the Fréchet bound; concave and zero at both ends.
fn clipped_tent(a: f64, b: f64, s: f64, r: f64) -> f64 {
    (a * s).min(b * r).min(s).min(r)
}

/// A random concave grid function: a convex combination of a minimum of
/// random tents, a Clayton TDF and a parabola, scaled by a random factor.
/// Minima and convex combinations of concave functions stay concave.
pub fn random_tdf(rng: &mut Stream, m: usize) -> Tdf {
    let tents: Vec<(f64, f64)> = (0..1 + (rng.next_u64() % 3) as usize)
        .map(|_| (4.0 * rng.uniform(), 4.0 * rng.uniform()))
        .collect();
    let theta = 0.2 + 5.0 * rng.uniform();
    let clayton = ParametricTdf::Clayton { theta };
    let c = rng.uniform();
    let mut w = [rng.exponential(), rng.exponential(), rng.exponential()];
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let scale = rng.uniform();
    let values = (0..=m)
        .map(|i| {
            let (s, r) = (i as f64 / m as f64, (m - i) as f64 / m as f64);
            let t = tents.iter().map(|&(a, b)| clipped_tent(a, b, s, r)).fold(f64::INFINITY, f64::min);
            let v = w[0] * t + w[1] * clayton.value_at(s) + w[2] * c * s * r;
            scale * v
        })
        .collect();
    Tdf::from_grid(values, true).expect("generator output is admissible")
}

/// Symmetrized about `s = 1/2`; averaging with the mirror image keeps concavity.
pub fn random_symmetric_tdf(rng: &mut Stream, m: usize) -> Tdf {
    let t = random_tdf(rng, m);
    let v = t.values();
    let values = (0..=m).map(|i| 0.5 * (v[i] + v[m - i])).collect();
    Tdf::from_grid(values, true).expect("symmetrization keeps admissibility")
}

/// Pointwise minimum of two TDFs on the same grid.
pub fn pointwise_min(a: &Tdf, b: &Tdf) -> Tdf {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x.min(*y)).collect();
    Tdf::from_grid(values, true).expect("minimum of concave functions is concave")
}
