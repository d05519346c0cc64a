//! The inner infimum `psi(w, mu)`, the characteristic time and the lower bound.
//!
//! `psi(w, mu)` is the smallest weighted transport cost
//! `1/2 sum_m w_m ||lambda_m - mu_m||^2` over mean matrices `lambda` whose
//! single-linkage clustering differs from that of `mu`. The alternative set is a
//! finite union of reverse-quadratic constraint sets, one per [`AltSpec`], and each
//! piece is solved separately:
//!
//! * single-pair specs (one arm per part) are solved exactly ([`gtrs`]);
//! * other specs use a multi-start augmented Lagrangian ([`augmented`]);
//! * for `d = 1` the default path replaces the spec loop by exact cone
//!   projections ([`line`]), validated against both of the above and the grid
//!   oracle.

mod augmented;
mod cone;
mod grid;
mod gtrs;
mod line;
mod optimize;

pub use grid::{grid_oracle_psi, GRID_MAX_COORDINATES};
pub use optimize::{kl_bernoulli, lower_bound, maximize_psi, t_star, t_star_with, TStar};

use crate::cluster::{enumerate_alt_specs, slink_cluster, AltSpec, ClusterAssignment};
use crate::error::ClusterError;
use crate::means::MeanMatrix;
use crate::scalar::Real;
use line::LineCones;

/// A point of the probability simplex over arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights<T> {
    w: Vec<T>,
}

impl<T: Real> SimplexWeights<T> {
    pub fn new(w: Vec<T>) -> Result<Self, ClusterError> {
        let sum: T = w.iter().copied().sum();
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(4.0 * w.len() as f64));
        if w.is_empty() || w.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) || (sum - T::one()).abs() > tol {
            return Err(ClusterError::InvalidWeights { sum: sum.as_f64() });
        }
        Ok(Self { w })
    }

    pub fn uniform(m: usize) -> Self {
        Self { w: vec![T::one() / T::lit(m as f64); m] }
    }

    /// Normalizes non-negative scores (e.g. pull counts).
    pub fn normalized(scores: &[T]) -> Result<Self, ClusterError> {
        let sum: T = scores.iter().copied().sum();
        if !(sum > T::zero()) {
            return Err(ClusterError::InvalidWeights { sum: sum.as_f64() });
        }
        Self::new(scores.iter().map(|&s| s / sum).collect())
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<T> {
        self.w
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&i| self.w[i] > T::zero()).collect()
    }
}

/// How each spec (or the whole infimum for `d = 1`) is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiMethod {
    /// Exact cone projections for `d = 1`; per-spec solvers otherwise.
    #[default]
    Auto,
    /// Loop over every spec: exact for single pairs, augmented Lagrangian otherwise.
    PerSpec,
    /// Augmented Lagrangian for every spec (cross-checking only).
    AugmentedLagrangian,
}

/// Tuning for the inner solvers and the outer maximization over weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: PsiMethod,
    pub multistarts: usize,
    pub max_inner_iterations: usize,
    pub gradient_tolerance: f64,
    /// Seed of the multi-start jitter.
    pub seed: u64,
    pub max_outer_iterations: usize,
    pub relative_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: PsiMethod::Auto,
            multistarts: 8,
            max_inner_iterations: 5000,
            gradient_tolerance: 1e-8,
            seed: 0,
            max_outer_iterations: 500,
            relative_tolerance: 1e-6,
        }
    }
}

/// One spec's optimization problem: the anchor means, weights and constraint set.
#[derive(Debug, Clone)]
pub struct QcqpProblem<'a, T> {
    pub spec: &'a AltSpec,
    pub weights: &'a SimplexWeights<T>,
    pub anchor_means: &'a MeanMatrix<T>,
}

/// A solved spec.
#[derive(Debug, Clone)]
pub struct QcqpSolution<T> {
    pub lambda: MeanMatrix<T>,
    pub value: T,
    /// False if the local solver ended without reaching feasibility tolerance.
    pub converged: bool,
}

/// Solves one spec. Arms outside the spec keep their anchor means.
pub fn solve_alt_qcqp<T: Real>(problem: &QcqpProblem<'_, T>, config: &SolverConfig) -> QcqpSolution<T> {
    let w = problem.weights.as_slice();
    if problem.spec.is_single_pair() && config.method != PsiMethod::AugmentedLagrangian {
        let (lambda, value) = gtrs::solve_single_pair(problem.anchor_means, w, problem.spec);
        QcqpSolution { lambda, value, converged: true }
    } else {
        let (lambda, value, converged) = augmented::solve_augmented(problem.anchor_means, w, problem.spec, config);
        QcqpSolution { lambda, value, converged }
    }
}

/// The infimum together with the most confusing alternative.
#[derive(Debug, Clone)]
pub struct PsiResult<T> {
    pub value: T,
    pub minimizer: MeanMatrix<T>,
    pub active_spec: AltSpec,
    /// `1/2 ||lambda*_m - mu_m||^2` per arm: a supergradient of `w -> psi(w, mu)`.
    pub arm_costs: Vec<T>,
    pub converged: bool,
}

enum Pieces<T> {
    Line(LineCones<T>),
    Specs(Vec<AltSpec>),
}

/// Evaluates `psi(., mu)` repeatedly for a fixed `mu`.
///
/// Clustering and the spec list are computed once.
pub struct PsiEvaluator<T> {
    means: MeanMatrix<T>,
    clustering: ClusterAssignment,
    pieces: Pieces<T>,
    config: SolverConfig,
}

impl<T: Real> PsiEvaluator<T> {
    /// Fails with [`ClusterError::EmptyAlternative`] when no cluster can be split.
    pub fn new(means: &MeanMatrix<T>, k: usize, config: &SolverConfig) -> Result<Self, ClusterError> {
        let clustering = slink_cluster(means, k)?;
        let pieces = if means.dim() == 1 && config.method == PsiMethod::Auto {
            let cones = LineCones::new(means, &clustering);
            if cones.is_empty() {
                return Err(ClusterError::EmptyAlternative);
            }
            Pieces::Line(cones)
        } else {
            let specs = enumerate_alt_specs(&clustering);
            if specs.is_empty() {
                return Err(ClusterError::EmptyAlternative);
            }
            Pieces::Specs(specs)
        };
        Ok(Self { means: means.clone(), clustering, pieces, config: config.clone() })
    }

    pub fn means(&self) -> &MeanMatrix<T> {
        &self.means
    }

    pub fn clustering(&self) -> &ClusterAssignment {
        &self.clustering
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// `psi(w, mu)` for raw weights; callers guarantee `w` is on the simplex.
    pub fn evaluate(&self, w: &[T]) -> PsiResult<T> {
        let (value, minimizer, active_spec, converged) = match &self.pieces {
            Pieces::Line(cones) => {
                let (v, l, s) = cones.evaluate(&self.means, w);
                (v, l, s, true)
            }
            Pieces::Specs(specs) => {
                let weights = SimplexWeights { w: w.to_vec() };
                let mut best: Option<(QcqpSolution<T>, &AltSpec)> = None;
                let mut all_converged = true;
                for spec in specs {
                    let sol = solve_alt_qcqp(&QcqpProblem { spec, weights: &weights, anchor_means: &self.means }, &self.config);
                    all_converged &= sol.converged;
                    if best.as_ref().map_or(true, |(b, _)| sol.value < b.value) {
                        best = Some((sol, spec));
                    }
                }
                let (sol, spec) = best.expect("non-empty spec list");
                (sol.value, sol.lambda, spec.clone(), all_converged)
            }
        };
        let arm_costs = (0..self.means.arms())
            .map(|m| T::lit(0.5) * crate::means::sq_dist(minimizer.arm(m), self.means.arm(m)))
            .collect();
        PsiResult { value, minimizer, active_spec, arm_costs, converged }
    }
}

/// `psi(w, mu)` with default solver settings.
pub fn psi<T: Real>(weights: &SimplexWeights<T>, means: &MeanMatrix<T>, k: usize) -> Result<PsiResult<T>, ClusterError> {
    psi_with(weights, means, k, &SolverConfig::default())
}

pub fn psi_with<T: Real>(
    weights: &SimplexWeights<T>,
    means: &MeanMatrix<T>,
    k: usize,
    config: &SolverConfig,
) -> Result<PsiResult<T>, ClusterError> {
    if weights.as_slice().len() != means.arms() {
        return Err(ClusterError::DimensionMismatch { expected: means.arms(), got: weights.as_slice().len() });
    }
    Ok(PsiEvaluator::new(means, k, config)?.evaluate(weights.as_slice()))
}

#[cfg(test)]
mod tests;
