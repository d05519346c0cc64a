//! Weighted projection onto a polyhedral cone `{x : r_i . x >= 0}`.
//!
//! Minimizing `1/2 sum_l w_l (x_l - y_l)^2` subject to the rows is solved through
//! its dual, a non-negative quadratic program in the row multipliers:
//! `min_{nu >= 0} 1/2 nu' G nu + b' nu` with `G = R W^-1 R'` and `b = R y`.
//! The primal cost equals `1/2 nu' G nu` at the dual optimum.

use crate::linalg::cholesky_solve;
use crate::scalar::Real;

/// A row with at most four non-zero coefficients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SparseRow<T> {
    pub idx: [usize; 4],
    pub coef: [T; 4],
    pub len: usize,
}

impl<T: Real> SparseRow<T> {
    /// Sums the `(coefficient, index)` terms, dropping cancelled entries.
    pub fn from_terms(terms: &[(T, usize)]) -> Self {
        let mut row = Self { idx: [0; 4], coef: [T::zero(); 4], len: 0 };
        for &(c, i) in terms {
            match row.idx[..row.len].iter().position(|&j| j == i) {
                Some(p) => row.coef[p] += c,
                None => {
                    row.idx[row.len] = i;
                    row.coef[row.len] = c;
                    row.len += 1;
                }
            }
        }
        let mut out = Self { idx: [0; 4], coef: [T::zero(); 4], len: 0 };
        for p in 0..row.len {
            if row.coef[p] != T::zero() {
                out.idx[out.len] = row.idx[p];
                out.coef[out.len] = row.coef[p];
                out.len += 1;
            }
        }
        out
    }

    #[inline]
    pub fn dot(&self, y: &[T]) -> T {
        (0..self.len).map(|p| self.coef[p] * y[self.idx[p]]).sum()
    }

    /// `sum_l r_l s_l / w_l`.
    #[inline]
    pub fn gram(&self, other: &Self, inv_w: &[T]) -> T {
        let mut s = T::zero();
        for p in 0..self.len {
            for q in 0..other.len {
                if self.idx[p] == other.idx[q] {
                    s += self.coef[p] * other.coef[q] * inv_w[self.idx[p]];
                }
            }
        }
        s
    }
}

/// Largest single-row projection cost, a lower bound on the full projection cost.
#[inline]
pub(crate) fn single_row_bound<T: Real>(rows: &[SparseRow<T>], offsets: &[T], inv_w: &[T]) -> T {
    let mut lb = T::zero();
    for (r, &b) in rows.iter().zip(offsets) {
        if b < T::zero() {
            lb = lb.max(b * b / (T::lit(2.0) * r.gram(r, inv_w)));
        }
    }
    lb
}

/// Projection cost for two rows, without allocating.
#[inline]
pub(crate) fn two_row_cost<T: Real>(rows: &[SparseRow<T>], offsets: &[T], inv_w: &[T]) -> T {
    let half = T::lit(0.5);
    let (g11, g22, g12) = (rows[0].gram(&rows[0], inv_w), rows[1].gram(&rows[1], inv_w), rows[0].gram(&rows[1], inv_w));
    let (b1, b2) = (offsets[0], offsets[1]);
    if b1 >= T::zero() && b2 >= T::zero() {
        return T::zero();
    }
    let tol = T::epsilon().sqrt() * b1.abs().max(b2.abs());
    let mut best = T::zero();
    // Each face whose unconstrained dual minimizer is feasible gives a candidate;
    // the optimum is the largest primal cost among them.
    if b1 < T::zero() && g12 * (-b1 / g11) + b2 >= -tol {
        best = best.max(half * b1 * b1 / g11);
    }
    if b2 < T::zero() && g12 * (-b2 / g22) + b1 >= -tol {
        best = best.max(half * b2 * b2 / g22);
    }
    let det = g11 * g22 - g12 * g12;
    if det > T::epsilon() * T::lit(64.0) * g11 * g22 {
        let nu1 = (-b1 * g22 + b2 * g12) / det;
        let nu2 = (-b2 * g11 + b1 * g12) / det;
        if nu1 >= T::zero() && nu2 >= T::zero() {
            best = best.max(-half * (b1 * nu1 + b2 * nu2));
        }
    }
    best
}

/// Solves the dual problem given the Gram matrix `g` (row-major `r x r`) and offsets `b`.
///
/// Returns the primal cost and the multipliers.
pub(crate) fn solve_dual<T: Real>(g: &[T], b: &[T]) -> (T, Vec<T>) {
    let r = b.len();
    if b.iter().all(|&x| x >= T::zero()) {
        return (T::zero(), vec![T::zero(); r]);
    }
    if r <= 6 {
        enumerate_faces(g, b)
    } else {
        active_set(g, b)
    }
}

fn restricted_solve<T: Real>(g: &[T], b: &[T], face: &[usize]) -> Option<Vec<T>> {
    let r = b.len();
    let n = face.len();
    let sub: Vec<T> = face.iter().flat_map(|&i| face.iter().map(move |&j| g[i * r + j])).collect();
    let rhs: Vec<T> = face.iter().map(|&i| -b[i]).collect();
    cholesky_solve(&sub, &rhs, n)
}

fn enumerate_faces<T: Real>(g: &[T], b: &[T]) -> (T, Vec<T>) {
    let r = b.len();
    let tol = T::epsilon().sqrt() * b.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let mut best = (T::zero(), vec![T::zero(); r]);
    for mask in 1u32..(1 << r) {
        let face: Vec<usize> = (0..r).filter(|&i| mask >> i & 1 == 1).collect();
        let Some(z) = restricted_solve(g, b, &face) else { continue };
        if z.iter().any(|&v| v < T::zero()) {
            continue;
        }
        let mut nu = vec![T::zero(); r];
        for (&i, &v) in face.iter().zip(&z) {
            nu[i] = v;
        }
        // Dual feasibility of the rows outside the face.
        let ok = (0..r).filter(|i| mask >> i & 1 == 0).all(|i| (0..r).map(|j| g[i * r + j] * nu[j]).sum::<T>() + b[i] >= -tol);
        if !ok {
            continue;
        }
        let cost = -T::lit(0.5) * face.iter().zip(&z).map(|(&i, &v)| b[i] * v).sum::<T>();
        if cost > best.0 {
            best = (cost, nu);
        }
    }
    best
}

/// Lawson-Hanson style active-set method for larger row counts.
fn active_set<T: Real>(g: &[T], b: &[T]) -> (T, Vec<T>) {
    let r = b.len();
    let tol = T::epsilon().sqrt() * b.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let mut nu = vec![T::zero(); r];
    let mut passive = vec![false; r];
    for _ in 0..(3 * r + 10) {
        let grad: Vec<T> = (0..r).map(|i| (0..r).map(|j| g[i * r + j] * nu[j]).sum::<T>() + b[i]).collect();
        let Some(enter) = (0..r)
            .filter(|&i| !passive[i] && grad[i] < -tol)
            .min_by(|&i, &j| grad[i].partial_cmp(&grad[j]).expect("finite gradient"))
        else {
            break;
        };
        passive[enter] = true;
        for _ in 0..(2 * r + 2) {
            let face: Vec<usize> = (0..r).filter(|&i| passive[i]).collect();
            let z = match restricted_solve(g, b, &face) {
                Some(z) => z,
                None => {
                    // Dependent rows: drop the newest one and stop growing this face.
                    passive[enter] = false;
                    break;
                }
            };
            if z.iter().all(|&v| v > T::zero()) {
                for (&i, &v) in face.iter().zip(&z) {
                    nu[i] = v;
                }
                break;
            }
            let mut alpha = T::one();
            for (&i, &v) in face.iter().zip(&z) {
                if v <= T::zero() {
                    alpha = alpha.min(nu[i] / (nu[i] - v));
                }
            }
            for (&i, &v) in face.iter().zip(&z) {
                nu[i] = nu[i] + alpha * (v - nu[i]);
                if nu[i] <= T::zero() || (v <= T::zero() && nu[i] <= tol) {
                    nu[i] = T::zero();
                    passive[i] = false;
                }
            }
        }
    }
    let gnu: T = (0..r).map(|i| nu[i] * (0..r).map(|j| g[i * r + j] * nu[j]).sum::<T>()).sum();
    (T::lit(0.5) * gnu, nu)
}
