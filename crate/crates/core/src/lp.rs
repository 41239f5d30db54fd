//! Dense bounded-variable primal simplex.
//!
//! Solves `max cᵀx` subject to `A x ≤ b` and `l ≤ x ≤ u`, with `l` finite and
//! `u` possibly infinite. Every row gets a slack in `[0, ∞)`; rows whose slack
//! would start negative get an artificial variable instead and are repaired by
//! a phase-one pass. After phase one the artificials are fixed at zero, and the
//! solver keeps its basis, so successive objectives are warm-started.
//!
//! Pricing is Dantzig's rule. After a run of degenerate pivots it switches to
//! Bland's rule, which cannot cycle, until a pivot makes progress again.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

/// One constraint `Σ coef·x_j ≤ rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Row<T> {
    pub coefs: Vec<(usize, T)>,
    pub rhs: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub rows: Vec<Row<T>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex<T> {
    n: usize,
    rows: usize,
    cols: usize,
    /// Row-major `B⁻¹[A I -E]`.
    tab: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    /// Current value of every column, basic or not.
    x: Vec<T>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_Bᵀ B⁻¹ a_j`.
    reduced: Vec<T>,
    tol: T,
    pivot_tol: T,
}

impl<T: Scalar> Simplex<T> {
    /// Builds the tableau and drives it to a feasible basis.
    pub fn new(problem: &Problem<T>) -> Result<Self> {
        let n = problem.lower.len();
        if problem.upper.len() != n {
            return Err(Error::parameter("bounds", "lower and upper lengths differ"));
        }
        for j in 0..n {
            let (l, u) = (problem.lower[j], problem.upper[j]);
            if !l.is_finite() || u.is_nan() || u < l {
                return Err(Error::Infeasible(format!("variable {j} has bounds [{l}, {u}]")));
            }
        }
        let rows = problem.rows.len();
        let x_start: Vec<T> = problem.lower.clone();
        let residual: Vec<T> = problem
            .rows
            .iter()
            .map(|r| r.rhs - r.coefs.iter().map(|&(j, a)| a * x_start[j]).sum::<T>())
            .collect();
        let art_rows: Vec<usize> = (0..rows).filter(|&r| residual[r] < T::zero()).collect();
        let cols = n + rows + art_rows.len();

        let mut tab = vec![T::zero(); rows * cols];
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        lower.resize(cols, T::zero());
        upper.resize(n + rows, T::infinity());
        upper.resize(cols, T::infinity());
        let mut x = x_start;
        x.resize(cols, T::zero());
        let mut basis = vec![0; rows];

        let mut art = art_rows.iter().enumerate().map(|(k, &r)| (r, n + rows + k)).peekable();
        for (r, row) in problem.rows.iter().enumerate() {
            let line = &mut tab[r * cols..(r + 1) * cols];
            for &(j, a) in &row.coefs {
                if j >= n {
                    return Err(Error::parameter("row", format!("column {j} out of range")));
                }
                line[j] += a;
            }
            line[n + r] = T::one();
            match art.peek() {
                Some(&(ar, col)) if ar == r => {
                    art.next();
                    // Basis column is -e_r, so the stored row is negated.
                    line[col] = -T::one();
                    line.iter_mut().for_each(|v| *v = -*v);
                    basis[r] = col;
                    x[col] = -residual[r];
                }
                _ => {
                    basis[r] = n + r;
                    x[n + r] = residual[r];
                }
            }
        }

        let tol = T::solver_tol();
        let mut lp = Simplex {
            n,
            rows,
            cols,
            tab,
            lower,
            upper,
            x,
            basis,
            reduced: vec![T::zero(); cols],
            tol,
            pivot_tol: tol,
        };

        if !art_rows.is_empty() {
            let mut c = vec![T::zero(); cols];
            c[n + rows..].iter_mut().for_each(|v| *v = -T::one());
            lp.set_cost(c);
            lp.iterate().map_err(|_| Error::Infeasible("phase one diverged".into()))?;
            let infeasibility: T = lp.x[n + rows..].iter().copied().sum();
            let scale = T::one() + problem.rows.iter().fold(T::zero(), |m, r| m.max(r.rhs.abs()));
            if infeasibility > tol * scale {
                return Err(Error::Infeasible(format!(
                    "constraints cannot be met (residual {infeasibility})"
                )));
            }
            for j in n + rows..cols {
                lp.upper[j] = T::zero();
                lp.x[j] = T::zero();
            }
        }
        Ok(lp)
    }

    /// Structural part of the current basic solution.
    pub fn solution(&self) -> &[T] {
        &self.x[..self.n]
    }

    /// Maximizes `cᵀx` from the current basis and returns the optimal value.
    pub fn maximize(&mut self, c: &[T]) -> Result<T> {
        assert_eq!(c.len(), self.n, "objective length");
        let mut cost = vec![T::zero(); self.cols];
        cost[..self.n].copy_from_slice(c);
        self.set_cost(cost);
        self.iterate()?;
        Ok(c.iter().zip(self.solution()).map(|(&a, &b)| a * b).sum())
    }

    fn set_cost(&mut self, cost: Vec<T>) {
        self.reduced.copy_from_slice(&cost);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != T::zero() {
                let line = &self.tab[r * self.cols..(r + 1) * self.cols];
                for (d, &a) in self.reduced.iter_mut().zip(line) {
                    *d -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = T::zero();
        }
    }

    fn iterate(&mut self) -> Result<()> {
        let mut is_basic = vec![false; self.cols];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some((j, dir)) = self.entering(&is_basic, bland) else {
                return Ok(());
            };
            let (step, leave) = self.ratio_test(j, dir, bland);
            if !step.is_finite() {
                return Err(Error::Unbounded);
            }
            let delta = if dir { step } else { -step };
            self.x[j] += delta;
            for r in 0..self.rows {
                let a = self.tab[r * self.cols + j];
                if a != T::zero() {
                    self.x[self.basis[r]] -= a * delta;
                }
            }
            match leave {
                Some((r, to_upper)) => {
                    let b = self.basis[r];
                    self.x[b] = if to_upper { self.upper[b] } else { self.lower[b] };
                    self.pivot(r, j);
                    is_basic[b] = false;
                    is_basic[j] = true;
                }
                None => {
                    // Bound flip: the entering variable crossed its own range.
                    self.x[j] = if dir { self.upper[j] } else { self.lower[j] };
                }
            }
            if step <= self.tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    /// Picks an improving nonbasic column; `true` means it increases.
    fn entering(&self, is_basic: &[bool], bland: bool) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, T)> = None;
        for (j, &basic) in is_basic.iter().enumerate().take(self.cols) {
            if basic || self.upper[j] - self.lower[j] <= self.tol {
                continue;
            }
            let d = self.reduced[j];
            let dir = if d > self.tol && self.x[j] < self.upper[j] {
                true
            } else if d < -self.tol && self.x[j] > self.lower[j] {
                false
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, v)| d.abs() > v) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Longest feasible step along column `j`, and the blocking row with the
    /// bound its basic variable reaches (`true` = upper). `None` is a bound flip.
    fn ratio_test(&self, j: usize, dir: bool, bland: bool) -> (T, Option<(usize, bool)>) {
        let flip = self.upper[j] - self.lower[j];
        let mut limits = Vec::new();
        let mut min = flip;
        for r in 0..self.rows {
            let mut a = self.tab[r * self.cols + j];
            if !dir {
                a = -a;
            }
            if a.abs() <= self.pivot_tol {
                continue;
            }
            let b = self.basis[r];
            let (lim, to_upper) = if a > T::zero() {
                ((self.x[b] - self.lower[b]) / a, false)
            } else if self.upper[b].is_finite() {
                ((self.upper[b] - self.x[b]) / -a, true)
            } else {
                continue;
            };
            let lim = lim.max(T::zero());
            min = min.min(lim);
            limits.push((r, lim, to_upper, a.abs()));
        }
        if min >= flip {
            return (flip, None);
        }
        // Among near-ties, Bland takes the smallest variable index; otherwise
        // the largest pivot element, for stability.
        let cutoff = min + self.tol;
        let chosen = limits
            .into_iter()
            .filter(|&(_, lim, _, _)| lim <= cutoff)
            .reduce(|p, q| {
                let better = if bland {
                    self.basis[q.0] < self.basis[p.0]
                } else {
                    q.3 > p.3
                };
                if better {
                    q
                } else {
                    p
                }
            })
            .expect("a row attains the minimum");
        (chosen.1.min(flip), Some((chosen.0, chosen.2)))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.tab[r * cols + j];
        let pivot_row: Vec<T> = self.tab[r * cols..(r + 1) * cols].iter().map(|&v| v / p).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.tab[i * cols + j];
            if f == T::zero() {
                continue;
            }
            let line = &mut self.tab[i * cols..(i + 1) * cols];
            for (v, &w) in line.iter_mut().zip(&pivot_row) {
                *v -= f * w;
            }
            line[j] = T::zero();
        }
        let f = self.reduced[j];
        if f != T::zero() {
            for (d, &w) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * w;
            }
        }
        self.reduced[j] = T::zero();
        self.tab[r * cols..(r + 1) * cols].copy_from_slice(&pivot_row);
        self.tab[r * cols + j] = T::one();
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coefs: &[(usize, f64)], rhs: f64) -> Row<f64> {
        Row {
            coefs: coefs.to_vec(),
            rhs,
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36.
        let p = Problem {
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
            rows: vec![row(&[(0, 1.0)], 4.0), row(&[(1, 2.0)], 12.0), row(&[(0, 3.0), (1, 2.0)], 18.0)],
        };
        let mut lp = Simplex::new(&p).unwrap();
        let v = lp.maximize(&[3.0, 5.0]).unwrap();
        assert!((v - 36.0).abs() < 1e-12);
        assert!((lp.solution()[0] - 2.0).abs() < 1e-12 && (lp.solution()[1] - 6.0).abs() < 1e-12);
        // Warm restart with a different objective: max x → 4.
        assert!((lp.maximize(&[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
        // min x + y is 0 at the origin.
        assert!(lp.maximize(&[-1.0, -1.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bounds_without_rows() {
        let p = Problem {
            lower: vec![-1.0, 2.0],
            upper: vec![3.0, 2.0],
            rows: vec![],
        };
        let mut lp = Simplex::new(&p).unwrap();
        assert_eq!(lp.maximize(&[1.0, 1.0]).unwrap(), 5.0);
        assert_eq!(lp.maximize(&[-1.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn phase_one_finds_feasible_point() {
        // x + y ≥ 3 written as -x - y ≤ -3, with x, y ∈ [0, 2].
        let p = Problem {
            lower: vec![0.0, 0.0],
            upper: vec![2.0, 2.0],
            rows: vec![row(&[(0, -1.0), (1, -1.0)], -3.0)],
        };
        let mut lp = Simplex::new(&p).unwrap();
        let s = lp.solution();
        assert!(s[0] + s[1] >= 3.0 - 1e-12);
        assert!((lp.maximize(&[-1.0, 0.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = Problem {
            lower: vec![0.0],
            upper: vec![1.0],
            rows: vec![row(&[(0, -1.0)], -2.0)],
        };
        assert!(matches!(Simplex::new(&p), Err(Error::Infeasible(_))));
        let p = Problem {
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
            rows: vec![row(&[(0, 1.0), (1, -1.0)], 1.0)],
        };
        let mut lp = Simplex::new(&p).unwrap();
        assert!(matches!(lp.maximize(&[0.0, 1.0]), Err(Error::Unbounded)));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Many redundant constraints through the optimum (Beale-style degeneracy).
        let mut rows = Vec::new();
        for k in 1..40 {
            let k = k as f64;
            rows.push(row(&[(0, k), (1, 1.0), (2, -k)], 0.0));
            rows.push(row(&[(0, 1.0), (1, k), (2, 1.0)], 1.0));
        }
        let p = Problem {
            lower: vec![0.0; 3],
            upper: vec![f64::INFINITY; 3],
            rows,
        };
        let mut lp = Simplex::new(&p).unwrap();
        let v = lp.maximize(&[1.0, 1.0, 1.0]).unwrap();
        let s = lp.solution().to_vec();
        for r in &p.rows {
            let lhs: f64 = r.coefs.iter().map(|&(j, a)| a * s[j]).sum();
            assert!(lhs <= r.rhs + 1e-9);
        }
        assert!(v > 0.0);
    }

    #[test]
    fn brute_force_vertex_oracle() {
        // Two variables in a box cut by random half-planes: compare against
        // enumeration of all pairwise constraint intersections.
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let rows: Vec<Row<f64>> = (0..5)
                .map(|_| row(&[(0, next() * 2.0 - 1.0), (1, next() * 2.0 - 1.0)], next()))
                .collect();
            let p = Problem {
                lower: vec![0.0, 0.0],
                upper: vec![1.0, 1.0],
                rows: rows.clone(),
            };
            let c = [next() * 2.0 - 1.0, next() * 2.0 - 1.0];
            // Lines: each row as equality plus the four box edges.
            let mut lines: Vec<([f64; 2], f64)> =
                rows.iter().map(|r| ([r.coefs[0].1, r.coefs[1].1], r.rhs)).collect();
            lines.extend([([1.0, 0.0], 0.0), ([1.0, 0.0], 1.0), ([0.0, 1.0], 0.0), ([0.0, 1.0], 1.0)]);
            let feasible = |x: [f64; 2]| {
                (0..2).all(|k| x[k] >= -1e-9 && x[k] <= 1.0 + 1e-9)
                    && rows.iter().all(|r| r.coefs[0].1 * x[0] + r.coefs[1].1 * x[1] <= r.rhs + 1e-9)
            };
            let mut best = f64::NEG_INFINITY;
            for a in 0..lines.len() {
                for b in a + 1..lines.len() {
                    let ([p1, q1], r1) = lines[a];
                    let ([p2, q2], r2) = lines[b];
                    let det = p1 * q2 - p2 * q1;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = [(r1 * q2 - r2 * q1) / det, (p1 * r2 - p2 * r1) / det];
                    if feasible(x) {
                        best = best.max(c[0] * x[0] + c[1] * x[1]);
                    }
                }
            }
            match Simplex::new(&p) {
                Ok(mut lp) => {
                    let v = lp.maximize(&c).unwrap();
                    assert!((v - best).abs() < 1e-9, "{v} vs {best}");
                }
                Err(Error::Infeasible(_)) => assert_eq!(best, f64::NEG_INFINITY),
                Err(e) => panic!("{e}"),
            }
        }
    }
}
