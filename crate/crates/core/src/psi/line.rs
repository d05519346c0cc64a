//! Exact evaluation of the inner infimum for one-dimensional arms.
//!
//! With `d = 1` the clusters of `mu` are intervals ("blocks") along the line. The
//! cheapest way to change the clustering is to open a gap inside some block `B_k`
//! (splitting it into a lower part `L` and an upper part `H`) that is at least as
//! wide as the gap `mu_n - mu_m` between two adjacent blocks. For a fixed choice of
//! `(k, L, H, m, n)` this is a weighted projection onto the polyhedral cone
//! `{x_b - x_a >= x_n - x_m for all a in L, b in H}`. Every such projection lands in
//! the closure of the alternative set, and the nearest alternative is one of them,
//! so the infimum is the smallest projection cost over all candidates.

use super::cone::{single_row_bound, solve_dual, two_row_cost, SparseRow};
use crate::cluster::{AltSpec, ClusterAssignment};
use crate::means::MeanMatrix;
use crate::scalar::Real;

struct Candidate<T> {
    spec: AltSpec,
    rows: Vec<SparseRow<T>>,
    offsets: Vec<T>,
}

/// Candidate cones for a fixed `mu`, reusable across weight vectors.
pub(crate) struct LineCones<T> {
    candidates: Vec<Candidate<T>>,
    /// Set when `mu` itself is not strictly separated, so every infimum is 0.
    degenerate: bool,
}

impl<T: Real> LineCones<T> {
    pub fn new(means: &MeanMatrix<T>, clustering: &ClusterAssignment) -> Self {
        debug_assert_eq!(means.dim(), 1);
        let mu: Vec<T> = (0..means.arms()).map(|m| means.arm(m)[0]).collect();
        let mut blocks = clustering.clusters();
        blocks.sort_by(|a, b| {
            let lo = |v: &[usize]| v.iter().map(|&i| mu[i]).fold(T::infinity(), T::min);
            lo(a).partial_cmp(&lo(b)).expect("finite means")
        });
        let mut candidates = Vec::new();
        for block in blocks.iter().filter(|b| b.len() >= 2) {
            let k = clustering.cluster_of(block[0]);
            let n = block.len();
            // Ordered bipartitions: `mask` selects the lower part.
            for mask in 1u64..(1u64 << n) - 1 {
                let low: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| block[i]).collect();
                let high: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| block[i]).collect();
                for pair in blocks.windows(2) {
                    for &m in &pair[0] {
                        for &nn in &pair[1] {
                            let rows: Vec<SparseRow<T>> = low
                                .iter()
                                .flat_map(|&a| high.iter().map(move |&b| (a, b)))
                                .map(|(a, b)| SparseRow::from_terms(&[(T::one(), b), (-T::one(), a), (T::one(), m), (-T::one(), nn)]))
                                .filter(|r| r.len > 0)
                                .collect();
                            let offsets: Vec<T> = rows.iter().map(|r| r.dot(&mu)).collect();
                            candidates.push(Candidate { spec: AltSpec::new(k, low.clone(), high.clone(), m, nn), rows, offsets });
                        }
                    }
                }
            }
        }
        // Cheap candidates first so pruning bites early.
        let unit = vec![T::one(); mu.len()];
        let mut keyed: Vec<(T, Candidate<T>)> =
            candidates.into_iter().map(|c| (single_row_bound(&c.rows, &c.offsets, &unit), c)).collect();
        keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite bounds"));
        let degenerate = !crate::cluster::is_separated(means, clustering).unwrap_or(false);
        Self { candidates: keyed.into_iter().map(|(_, c)| c).collect(), degenerate }
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Returns `(value, minimizer, active spec)`.
    pub fn evaluate(&self, means: &MeanMatrix<T>, weights: &[T]) -> (T, MeanMatrix<T>, AltSpec) {
        let first = &self.candidates[0];
        if self.degenerate {
            return (T::zero(), means.clone(), first.spec.clone());
        }
        let wmax = weights.iter().copied().fold(T::zero(), T::max);
        let floor = T::weight_floor() * wmax.max(T::min_positive_value());
        let inv_w: Vec<T> = weights.iter().map(|&w| T::one() / w.max(floor)).collect();

        let mut best = T::infinity();
        let mut winner = 0;
        for (i, c) in self.candidates.iter().enumerate() {
            let lb = single_row_bound(&c.rows, &c.offsets, &inv_w);
            if lb >= best {
                continue;
            }
            let value = match c.rows.len() {
                1 => lb,
                2 => two_row_cost(&c.rows, &c.offsets, &inv_w),
                _ => solve_dual(&gram(&c.rows, &inv_w), &c.offsets).0,
            };
            if value < best {
                best = value;
                winner = i;
                if best == T::zero() {
                    break;
                }
            }
        }
        let c = &self.candidates[winner];
        let (_, nu) = solve_dual(&gram(&c.rows, &inv_w), &c.offsets);
        let mut lambda = means.clone();
        for (r, &v) in c.rows.iter().zip(&nu) {
            for p in 0..r.len {
                let l = r.idx[p];
                lambda.arm_mut(l)[0] += v * r.coef[p] * inv_w[l];
            }
        }
        let value = lambda.weighted_half_sq_dist(means, weights);
        (value, lambda, c.spec.clone())
    }
}

fn gram<T: Real>(rows: &[SparseRow<T>], inv_w: &[T]) -> Vec<T> {
    rows.iter().flat_map(|a| rows.iter().map(move |b| a.gram(b, inv_w))).collect()
}
