//! Arm mean vectors stored as a d x M matrix.

use crate::error::ClusterError;
use crate::scalar::Real;

/// Mean vectors of `M` arms in dimension `d`.
///
/// Storage is arm-major so that `arm(m)` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix<T> {
    dim: usize,
    arms: usize,
    data: Vec<T>,
}

impl<T: Real> MeanMatrix<T> {
    /// Builds a matrix from one vector per arm.
    pub fn from_arms(arms: &[Vec<T>]) -> Result<Self, ClusterError> {
        let dim = arms.first().map_or(0, Vec::len);
        if arms.is_empty() || dim == 0 {
            return Err(ClusterError::EmptyInstance);
        }
        let mut data = Vec::with_capacity(dim * arms.len());
        for a in arms {
            if a.len() != dim {
                return Err(ClusterError::DimensionMismatch { expected: dim, got: a.len() });
            }
            data.extend_from_slice(a);
        }
        Self::from_raw(dim, arms.len(), data)
    }

    /// Builds a matrix from `d` rows of length `M` (row `i` holds coordinate `i` of every arm).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, ClusterError> {
        let dim = rows.len();
        let arms = rows.first().map_or(0, Vec::len);
        if dim == 0 || arms == 0 {
            return Err(ClusterError::EmptyInstance);
        }
        let mut data = vec![T::zero(); dim * arms];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != arms {
                return Err(ClusterError::DimensionMismatch { expected: arms, got: row.len() });
            }
            for (m, &v) in row.iter().enumerate() {
                data[m * dim + i] = v;
            }
        }
        Self::from_raw(dim, arms, data)
    }

    /// One-dimensional instance.
    pub fn from_scalars(values: &[T]) -> Result<Self, ClusterError> {
        if values.is_empty() {
            return Err(ClusterError::EmptyInstance);
        }
        Self::from_raw(1, values.len(), values.to_vec())
    }

    fn from_raw(dim: usize, arms: usize, data: Vec<T>) -> Result<Self, ClusterError> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite("mean matrix"));
        }
        Ok(Self { dim, arms, data })
    }

    /// All-zero matrix, used as an accumulator.
    pub fn zeros(dim: usize, arms: usize) -> Self {
        Self { dim, arms, data: vec![T::zero(); dim * arms] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn arms(&self) -> usize {
        self.arms
    }

    #[inline]
    pub fn arm(&self, m: usize) -> &[T] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }

    #[inline]
    pub fn arm_mut(&mut self, m: usize) -> &mut [T] {
        &mut self.data[m * self.dim..(m + 1) * self.dim]
    }

    /// Squared Euclidean distance between arms `i` and `j`.
    #[inline]
    pub fn sq_dist(&self, i: usize, j: usize) -> T {
        sq_dist(self.arm(i), self.arm(j))
    }

    /// Euclidean distance between arms `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.sq_dist(i, j).sqrt()
    }

    /// `sum_m w_m ||self_m - other_m||^2 / 2`.
    pub fn weighted_half_sq_dist(&self, other: &Self, weights: &[T]) -> T {
        (0..self.arms).map(|m| weights[m] * sq_dist(self.arm(m), other.arm(m))).sum::<T>() * T::lit(0.5)
    }

    /// Every coordinate multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Self { dim: self.dim, arms: self.arms, data: self.data.iter().map(|&v| v * c).collect() }
    }

    /// Means restricted to the listed arms, in the given order.
    pub fn select(&self, arms: &[usize]) -> Self {
        let mut data = Vec::with_capacity(arms.len() * self.dim);
        for &m in arms {
            data.extend_from_slice(self.arm(m));
        }
        Self { dim: self.dim, arms: arms.len(), data }
    }

    /// Rows of length `M`, the inverse of [`MeanMatrix::from_rows`].
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim).map(|i| (0..self.arms).map(|m| self.arm(m)[i]).collect()).collect()
    }

    /// Minimum and maximum over all coordinates.
    pub fn value_range(&self) -> (T, T) {
        self.data.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn cast<U: Real>(&self) -> MeanMatrix<U> {
        MeanMatrix { dim: self.dim, arms: self.arms, data: self.data.iter().map(|v| U::lit(v.as_f64())).collect() }
    }
}

#[inline]
pub(crate) fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}
