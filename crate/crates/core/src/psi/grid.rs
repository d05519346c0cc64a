//! Brute-force grid oracle for the inner infimum.
//!
//! Searches a regular grid over `[min mu - 2, max mu + 2]` in every coordinate and
//! keeps only points whose clustering differs from that of `mu`. Every retained point
//! is a genuine alternative, so the result is an upper bound on the infimum; it
//! exceeds the infimum by at most the cost of rounding the true minimizer to the grid
//! (about `step * sum_m w_m |lambda*_m - mu_m|` for small steps).
//!
//! The search is exact branch-and-bound: each coordinate visits grid values in
//! order of increasing cost, so a branch stops as soon as its partial cost reaches
//! the incumbent.

use crate::cluster::{slink_cluster, ClusterAssignment};
use crate::error::ClusterError;
use crate::means::MeanMatrix;
use crate::scalar::Real;

use super::SimplexWeights;

/// Largest `M * d` the oracle accepts.
pub const GRID_MAX_COORDINATES: usize = 4;

struct Search<'a, T> {
    k: usize,
    truth: &'a ClusterAssignment,
    /// Per coordinate: `(cost, value)` sorted by cost.
    options: Vec<Vec<(T, T)>>,
    point: MeanMatrix<T>,
    dim: usize,
    best: T,
}

impl<T: Real> Search<'_, T> {
    fn descend(&mut self, depth: usize, partial: T) {
        if depth == self.options.len() {
            if differs_from(&self.point, self.k, self.truth) {
                self.best = partial;
            }
            return;
        }
        let (arm, coord) = (depth / self.dim, depth % self.dim);
        for i in 0..self.options[depth].len() {
            let (cost, value) = self.options[depth][i];
            if partial + cost >= self.best {
                break;
            }
            self.point.arm_mut(arm)[coord] = value;
            self.descend(depth + 1, partial + cost);
        }
    }
}

/// Single linkage on at most four arms without allocation, compared pairwise with
/// `truth`: two partitions agree iff every arm pair is together in both or apart in both.
fn differs_from<T: Real>(point: &MeanMatrix<T>, k: usize, truth: &ClusterAssignment) -> bool {
    let m = point.arms();
    let mut edges = [(T::zero(), 0usize, 0usize); 6];
    let mut count = 0;
    for i in 0..m {
        for j in i + 1..m {
            edges[count] = (point.sq_dist(i, j), i, j);
            count += 1;
        }
    }
    let edges = &mut edges[..count];
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut root = [0usize, 1, 2, 3];
    let find = |root: &[usize; 4], mut x: usize| {
        while root[x] != x {
            x = root[x];
        }
        x
    };
    let mut components = m;
    for &(_, i, j) in edges.iter() {
        if components == k {
            break;
        }
        let (ri, rj) = (find(&root, i), find(&root, j));
        if ri != rj {
            root[ri.max(rj)] = ri.min(rj);
            components -= 1;
        }
    }
    (0..m).any(|i| (i + 1..m).any(|j| (find(&root, i) == find(&root, j)) != (truth.cluster_of(i) == truth.cluster_of(j))))
}

/// Minimum of `1/2 sum w_m ||lambda_m - mu_m||^2` over grid points in the alternative set.
pub fn grid_oracle_psi<T: Real>(weights: &SimplexWeights<T>, means: &MeanMatrix<T>, k: usize, step: T) -> Result<T, ClusterError> {
    let coords = means.arms() * means.dim();
    if coords > GRID_MAX_COORDINATES {
        return Err(ClusterError::GridTooLarge { got: coords, limit: GRID_MAX_COORDINATES });
    }
    if weights.as_slice().len() != means.arms() {
        return Err(ClusterError::DimensionMismatch { expected: means.arms(), got: weights.as_slice().len() });
    }
    let truth = slink_cluster(means, k)?;
    let (lo, hi) = means.value_range();
    let lo = lo - T::lit(2.0);
    let count = ((hi + T::lit(2.0) - lo) / step + T::lit(1e-9)).floor().to_usize().expect("finite grid") + 1;
    let grid: Vec<T> = (0..count).map(|i| lo + step * T::lit(i as f64)).collect();
    let dim = means.dim();
    let options = (0..coords)
        .map(|depth| {
            let (arm, coord) = (depth / dim, depth % dim);
            let target = means.arm(arm)[coord];
            let w = weights.as_slice()[arm];
            let mut o: Vec<(T, T)> = grid.iter().map(|&g| (T::lit(0.5) * w * (g - target) * (g - target), g)).collect();
            o.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.partial_cmp(&b.1).expect("finite")));
            o
        })
        .collect();
    let mut search = Search { k, truth: &truth, options, point: means.clone(), dim, best: T::infinity() };
    search.descend(0, T::zero());
    if search.best.is_infinite() {
        Err(ClusterError::EmptyAlternative)
    } else {
        Ok(search.best)
    }
}
