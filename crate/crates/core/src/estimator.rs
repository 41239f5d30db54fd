//! Rank-based nonparametric estimation of the tail dependence function.
//!
//! For a threshold `k`, the empirical tail copula at `(x, y)` is
//!
//! ```text
//! Λ̂(x, y) = (1/k) · #{ j : R_j^X ≤ k·x  and  R_j^Y ≤ k·y }
//! ```
//!
//! and the simplex restriction is `Λ̂(s) = Λ̂(s, 1 - s)`. The upper tail is
//! handled by reflecting ranks (`n + 1 - R`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tdf::TailDependenceFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Equal observations are ranked by their position in the input.
    #[default]
    StableOrder,
}

/// Paired ranks `1..=n` of a bivariate sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedSample {
    rank_x: Vec<usize>,
    rank_y: Vec<usize>,
    tie_policy: TiePolicy,
}

impl RankedSample {
    pub fn len(&self) -> usize {
        self.rank_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_x.is_empty()
    }

    pub fn rank_x(&self) -> &[usize] {
        &self.rank_x
    }

    pub fn rank_y(&self) -> &[usize] {
        &self.rank_y
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    /// Ranks as seen from the chosen tail: identity for the lower tail,
    /// `n + 1 - R` for the upper.
    fn oriented(&self, tail: Tail) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        self.rank_x
            .iter()
            .zip(&self.rank_y)
            .map(move |(&rx, &ry)| match tail {
                Tail::Lower => (rx, ry),
                Tail::Upper => (n + 1 - rx, n + 1 - ry),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Threshold: the effective number of tail observations.
    pub k: usize,
    pub grid_size: usize,
    pub tail: Tail,
}

impl EstimatorConfig {
    pub const DEFAULT_GRID: usize = 200;

    /// `k = ⌊√n⌋` on the default grid, lower tail.
    pub fn for_sample_size(n: usize) -> Self {
        EstimatorConfig {
            k: default_threshold(n),
            grid_size: Self::DEFAULT_GRID,
            tail: Tail::Lower,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k > n {
            return Err(Error::Config(format!("k = {} exceeds sample size {n}", self.k)));
        }
        if self.grid_size < 2 {
            return Err(Error::Config(format!(
                "grid size must be at least 2, got {}",
                self.grid_size
            )));
        }
        Ok(())
    }
}

/// `⌊√n⌋`, at least 1.
pub fn default_threshold(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r.max(1)
}

fn rank_of<T: Scalar>(data: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    // Stable sort keeps input order among ties.
    order.sort_by(|&a, &b| data[a].partial_cmp(&data[b]).expect("finite data"));
    let mut ranks = vec![0; data.len()];
    for (r, &idx) in order.iter().enumerate() {
        ranks[idx] = r + 1;
    }
    ranks
}

/// Rank transform of a paired sample; rank 1 is the smallest value.
pub fn ranks<T: Scalar>(x: &[T], y: &[T]) -> Result<RankedSample> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Data(format!("need at least 2 observations, got {}", x.len())));
    }
    for (name, data) in [("x", x), ("y", y)] {
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite {name} value at index {i}")));
        }
    }
    Ok(RankedSample {
        rank_x: rank_of(x),
        rank_y: rank_of(y),
        tie_policy: TiePolicy::StableOrder,
    })
}

/// Empirical tail copula at a single point `(x, y)` of the quadrant.
pub fn tail_copula_at<T: Scalar>(
    sample: &RankedSample,
    k: usize,
    tail: Tail,
    x: T,
    y: T,
) -> Result<T> {
    if k == 0 || k > sample.len() {
        return Err(Error::Config(format!("k = {k} outside 1..={}", sample.len())));
    }
    if !(x >= T::zero()) || !(y >= T::zero()) {
        return Err(Error::domain("(x, y)", x.min(y).to_f64_lossy(), "[0, ∞)²"));
    }
    let kf = T::from_usize_exact(k);
    let (tx, ty) = (kf * x, kf * y);
    let count = sample
        .oriented(tail)
        .filter(|&(rx, ry)| T::from_usize_exact(rx) <= tx && T::from_usize_exact(ry) <= ty)
        .count();
    Ok(T::from_usize_exact(count) / kf)
}

/// Estimates `Λ̂` on the grid `s_i = i / m`.
///
/// The indicator `R ≤ k·s_i` is evaluated in integers as `R·m ≤ k·i`, so the
/// estimate is bit-reproducible. Each observation contributes to a contiguous
/// range of grid indices, which is accumulated with a difference array.
pub fn empirical_tdf<T: Scalar>(
    sample: &RankedSample,
    cfg: &EstimatorConfig,
) -> Result<TailDependenceFunction<T>> {
    cfg.check(sample.len())?;
    let (m, k) = (cfg.grid_size, cfg.k);
    let mut diff = vec![0i64; m + 2];
    for (rx, ry) in sample.oriented(cfg.tail) {
        if rx > k || ry > k {
            continue;
        }
        // rx·m ≤ k·i  ⇔  i ≥ ⌈rx·m / k⌉;   ry·m ≤ k·(m - i)  ⇔  i ≤ m - ⌈ry·m / k⌉
        let lo = (rx * m).div_ceil(k);
        let hi = m - (ry * m).div_ceil(k);
        if lo <= hi {
            diff[lo] += 1;
            diff[hi + 1] -= 1;
        }
    }
    let kf = T::from_usize_exact(k);
    let mut running = 0i64;
    let mut values = Vec::with_capacity(m + 1);
    for d in &diff[..=m] {
        running += d;
        values.push(T::from_i64(running).expect("count") / kf);
    }
    values[0] = T::zero();
    values[m] = T::zero();
    TailDependenceFunction::from_grid(values, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate<T> {
    /// Index of the first observation in the window.
    pub start: usize,
    pub tdf: TailDependenceFunction<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingEstimate<T> {
    pub estimates: Vec<WindowEstimate<T>>,
    /// Start indices of windows that contained missing (NaN) observations.
    pub skipped: Vec<usize>,
}

/// Number of windows of length `window` advancing by `step` over `n` observations.
pub fn window_count(n: usize, window: usize, step: usize) -> usize {
    if window == 0 || step == 0 || window > n {
        0
    } else {
        (n - window) / step + 1
    }
}

/// Estimates one TDF per window `[t, t + window)`, `t = 0, step, 2·step, ...`.
///
/// Windows containing NaN are skipped and listed in [`RollingEstimate::skipped`].
/// Windows are evaluated in parallel; the output order and values do not
/// depend on scheduling.
pub fn rolling_estimate<T: Scalar>(
    x: &[T],
    y: &[T],
    window: usize,
    step: usize,
    cfg: &EstimatorConfig,
) -> Result<RollingEstimate<T>> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if step == 0 {
        return Err(Error::Config("step must be at least 1".into()));
    }
    if window < 2 || window > x.len() {
        return Err(Error::Data(format!(
            "window {window} must lie in 2..={}",
            x.len()
        )));
    }
    cfg.check(window)?;
    if let Some(i) = x.iter().chain(y).position(|v| v.is_infinite()) {
        return Err(Error::Data(format!("infinite value at position {i}")));
    }
    let count = window_count(x.len(), window, step);
    let results: Vec<Result<Option<WindowEstimate<T>>>> = (0..count)
        .into_par_iter()
        .map(|w| {
            let start = w * step;
            let (xs, ys) = (&x[start..start + window], &y[start..start + window]);
            if xs.iter().chain(ys).any(|v| v.is_nan()) {
                return Ok(None);
            }
            let sample = ranks(xs, ys)?;
            Ok(Some(WindowEstimate {
                start,
                tdf: empirical_tdf(&sample, cfg)?,
            }))
        })
        .collect();
    let mut out = RollingEstimate {
        estimates: Vec::new(),
        skipped: Vec::new(),
    };
    for (w, r) in results.into_iter().enumerate() {
        match r? {
            Some(est) => out.estimates.push(est),
            None => out.skipped.push(w * step),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let r = ranks(&[0.1, 0.5, 0.9, 0.3], &[0.2, 0.4, 0.8, 0.6]).unwrap();
        assert_eq!(r.rank_x(), &[1, 3, 4, 2]);
        assert_eq!(r.rank_y(), &[1, 2, 4, 3]);
        let r = ranks(&[2.0, 2.0], &[1.0, 0.0]).unwrap();
        assert_eq!(r.rank_x(), &[1, 2]);
        assert_eq!(r.tie_policy(), TiePolicy::StableOrder);
    }

    #[test]
    fn rank_errors() {
        assert!(ranks(&[1.0, 2.0], &[1.0]).is_err());
        assert!(ranks(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(ranks(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn tail_copula_hand_count() {
        let sample = RankedSample {
            rank_x: vec![1, 3, 4, 2],
            rank_y: vec![1, 2, 4, 3],
            tie_policy: TiePolicy::StableOrder,
        };
        assert_eq!(tail_copula_at(&sample, 2, Tail::Lower, 1.0, 1.0).unwrap(), 0.5);
        assert!(tail_copula_at(&sample, 5, Tail::Lower, 1.0, 1.0f64).is_err());
    }

    /// Direct indicator count over all observations and grid points,
    /// independent of the difference-array path.
    fn brute_force(sample: &RankedSample, k: usize, m: usize, tail: Tail) -> Vec<f64> {
        let n = sample.len();
        (0..=m)
            .map(|i| {
                if i == 0 || i == m {
                    return 0.0;
                }
                let mut count = 0;
                for j in 0..n {
                    let (mut rx, mut ry) = (sample.rank_x[j], sample.rank_y[j]);
                    if tail == Tail::Upper {
                        rx = n + 1 - rx;
                        ry = n + 1 - ry;
                    }
                    if rx * m <= k * i && ry * m <= k * (m - i) {
                        count += 1;
                    }
                }
                count as f64 / k as f64
            })
            .collect()
    }

    #[test]
    fn grid_estimate_matches_indicator_count() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 7919) % 301) as f64).collect();
        let y: Vec<f64> = (0..300).map(|i| ((i * 104_729 + 13) % 307) as f64).collect();
        let sample = ranks(&x, &y).unwrap();
        for &(k, m) in &[(17, 200), (30, 7), (300, 40), (1, 10), (40, 40)] {
            for tail in [Tail::Lower, Tail::Upper] {
                let cfg = EstimatorConfig { k, grid_size: m, tail };
                let est = empirical_tdf::<f64>(&sample, &cfg).unwrap();
                assert_eq!(est.values(), &brute_force(&sample, k, m, tail)[..], "k={k} m={m} {tail:?}");
            }
        }
    }

    #[test]
    fn grid_estimate_agrees_with_point_evaluation() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 53) % 211) as f64).collect();
        let y: Vec<f64> = (0..200).map(|i| ((i * 29 + 5) % 199) as f64).collect();
        let sample = ranks(&x, &y).unwrap();
        // m = 16 and k = 32 keep k·s exactly representable.
        let cfg = EstimatorConfig { k: 32, grid_size: 16, tail: Tail::Lower };
        let est = empirical_tdf::<f64>(&sample, &cfg).unwrap();
        for i in 1..16 {
            let s = i as f64 / 16.0;
            let direct = tail_copula_at(&sample, 32, Tail::Lower, s, 1.0 - s).unwrap();
            assert_eq!(est.values()[i], direct);
        }
    }

    #[test]
    fn comonotone_sample_counts_half_threshold() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let sample = ranks(&x, &x).unwrap();
        for k in [10, 11, 31, 141] {
            let cfg = EstimatorConfig { k, grid_size: 200, tail: Tail::Lower };
            let est = empirical_tdf::<f64>(&sample, &cfg).unwrap();
            let expected = (k / 2) as f64 / k as f64;
            assert_eq!(est.eval(0.5).unwrap(), expected);
        }
    }

    #[test]
    fn config_errors() {
        let sample = ranks(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        let cfg = EstimatorConfig { k: 4, grid_size: 10, tail: Tail::Lower };
        assert!(matches!(empirical_tdf::<f64>(&sample, &cfg), Err(Error::Config(_))));
        let cfg = EstimatorConfig { k: 0, grid_size: 10, tail: Tail::Lower };
        assert!(empirical_tdf::<f64>(&sample, &cfg).is_err());
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_count(2500, 500, 1), 2001);
        assert_eq!(window_count(500, 500, 1), 1);
        assert_eq!(window_count(2500, 500, 500), 5);
        assert_eq!(window_count(2499, 500, 500), 4);
        assert_eq!(window_count(100, 500, 1), 0);
    }

    #[test]
    fn default_threshold_is_integer_sqrt() {
        assert_eq!(default_threshold(500), 22);
        assert_eq!(default_threshold(20000), 141);
        assert_eq!(default_threshold(10000), 100);
        assert_eq!(default_threshold(1), 1);
        assert_eq!(default_threshold(0), 1);
    }

    #[test]
    fn rolling_skips_missing_windows() {
        let n = 60;
        let mut x: Vec<f64> = (0..n).map(|i| ((i * 37) % 61) as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 11) % 61) as f64).collect();
        x[25] = f64::NAN;
        let cfg = EstimatorConfig { k: 5, grid_size: 20, tail: Tail::Lower };
        let r = rolling_estimate(&x, &y, 20, 5, &cfg).unwrap();
        assert_eq!(r.estimates.len() + r.skipped.len(), window_count(n, 20, 5));
        assert_eq!(r.skipped, vec![10, 15, 20, 25]);
        assert!(rolling_estimate(&x, &y, 61, 1, &cfg).is_err());
        assert!(rolling_estimate(&x, &y, 20, 0, &cfg).is_err());
    }
}
