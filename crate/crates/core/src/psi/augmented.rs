//! Multi-start augmented Lagrangian solver for a general spec.
//!
//! Handles any number of reverse quadratic constraints in any dimension. Each start
//! runs a BFGS inner loop on the augmented Lagrangian followed by a multiplier
//! update; the best feasible local minimum across starts is returned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SolverConfig;
use crate::cluster::AltSpec;
use crate::means::MeanMatrix;
use crate::scalar::Real;

/// Normalized violation accepted as feasible.
const FEASIBILITY_TOL: f64 = 1e-9;
const MAX_OUTER: usize = 60;

struct Problem<T> {
    d: usize,
    /// Local indices `(a, b, m, n)` of each constraint.
    rows: Vec<(usize, usize, usize, usize)>,
    w: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> Problem<T> {
    fn diff_sq(&self, x: &[T], i: usize, j: usize) -> T {
        let d = self.d;
        (0..d).map(|c| (x[i * d + c] - x[j * d + c]).powi(2)).sum()
    }

    fn constraint(&self, x: &[T], r: usize) -> T {
        let (a, b, m, n) = self.rows[r];
        self.diff_sq(x, a, b) - self.diff_sq(x, m, n)
    }

    fn objective(&self, x: &[T]) -> T {
        let d = self.d;
        (0..self.w.len()).map(|l| self.w[l] * (0..d).map(|c| (x[l * d + c] - self.y[l * d + c]).powi(2)).sum::<T>()).sum::<T>()
            * T::lit(0.5)
    }

    fn violation(&self, x: &[T]) -> T {
        (0..self.rows.len()).map(|r| (-self.constraint(x, r)).max(T::zero())).fold(T::zero(), T::max)
    }

    /// Augmented Lagrangian value and gradient.
    fn lagrangian(&self, x: &[T], nu: &[T], rho: T, grad: &mut [T]) -> T {
        let d = self.d;
        let mut val = T::zero();
        for l in 0..self.w.len() {
            for c in 0..d {
                let diff = x[l * d + c] - self.y[l * d + c];
                val += T::lit(0.5) * self.w[l] * diff * diff;
                grad[l * d + c] = self.w[l] * diff;
            }
        }
        for (r, &(a, b, m, n)) in self.rows.iter().enumerate() {
            let g = self.constraint(x, r);
            let active = nu[r] - rho * g;
            if active > T::zero() {
                val += -nu[r] * g + T::lit(0.5) * rho * g * g;
                for c in 0..d {
                    let dab = T::lit(2.0) * (x[a * d + c] - x[b * d + c]);
                    let dmn = T::lit(2.0) * (x[m * d + c] - x[n * d + c]);
                    grad[a * d + c] -= active * dab;
                    grad[b * d + c] += active * dab;
                    grad[m * d + c] += active * dmn;
                    grad[n * d + c] -= active * dmn;
                }
            } else {
                val -= nu[r] * nu[r] / (T::lit(2.0) * rho);
            }
        }
        val
    }
}

/// BFGS with Armijo backtracking on the augmented Lagrangian.
fn minimize_inner<T: Real>(p: &Problem<T>, x: &mut [T], nu: &[T], rho: T, cfg: &SolverConfig) -> T {
    let n = x.len();
    let mut hinv = vec![T::zero(); n * n];
    for i in 0..n {
        hinv[i * n + i] = T::one();
    }
    let mut g = vec![T::zero(); n];
    let mut f = p.lagrangian(x, nu, rho, &mut g);
    let tol = T::lit(cfg.gradient_tolerance).max(T::epsilon() * T::lit(100.0));
    let mut g_new = vec![T::zero(); n];
    let mut x_new = vec![T::zero(); n];
    for _ in 0..cfg.max_inner_iterations {
        let gnorm = g.iter().map(|&v| v * v).sum::<T>().sqrt();
        if gnorm <= tol {
            break;
        }
        let mut dir: Vec<T> = (0..n).map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<T>()).collect();
        let mut slope: T = dir.iter().zip(&g).map(|(&a, &b)| a * b).sum();
        if slope >= T::zero() {
            // Lost positive definiteness: restart from steepest descent.
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { T::one() } else { T::zero() };
                }
            }
            dir = g.iter().map(|&v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = p.lagrangian(&x_new, nu, rho, &mut g_new);
            if f_new <= f + T::lit(1e-4) * step * slope {
                accepted = true;
                f = f_new;
                break;
            }
            step = step * T::lit(0.5);
        }
        if !accepted {
            break;
        }
        let s: Vec<T> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let yv: Vec<T> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy: T = s.iter().zip(&yv).map(|(&a, &b)| a * b).sum();
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        if sy > T::epsilon() {
            let hy: Vec<T> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * yv[j]).sum()).collect();
            let yhy: T = yv.iter().zip(&hy).map(|(&a, &b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
    }
    f
}

/// Runs the multi-start solver. Returns the full minimizer, its cost and whether a
/// feasible point was reached.
pub(crate) fn solve_augmented<T: Real>(
    means: &MeanMatrix<T>,
    weights: &[T],
    spec: &AltSpec,
    cfg: &SolverConfig,
) -> (MeanMatrix<T>, T, bool) {
    let arms = spec.involved_arms();
    let s = arms.len();
    let d = means.dim();
    let local = |a: usize| arms.iter().position(|&x| x == a).expect("arm in spec");
    let rows: Vec<_> = spec
        .part1
        .iter()
        .flat_map(|&a| spec.part2.iter().map(move |&b| (a, b)))
        .map(|(a, b)| (local(a), local(b), local(spec.arm_m), local(spec.arm_n)))
        .collect();

    // Normalize to unit spread and unit total weight so tolerances are scale free.
    let mut scale = T::zero();
    for i in 0..s {
        for j in i + 1..s {
            scale = scale.max(means.sq_dist(arms[i], arms[j]).sqrt());
        }
    }
    let wsum: T = arms.iter().map(|&a| weights[a]).sum();
    let mut lambda = means.clone();
    if scale == T::zero() || wsum == T::zero() {
        // Coincident arms satisfy every constraint; zero weight lets us collapse m, n freely.
        let (m, n) = (spec.arm_m, spec.arm_n);
        let mid: Vec<T> = (0..d).map(|c| (means.arm(m)[c] + means.arm(n)[c]) * T::lit(0.5)).collect();
        lambda.arm_mut(m).copy_from_slice(&mid);
        lambda.arm_mut(n).copy_from_slice(&mid);
        let value = lambda.weighted_half_sq_dist(means, weights);
        return (lambda, value, true);
    }
    let origin = means.arm(arms[0]).to_vec();
    let y: Vec<T> = arms.iter().flat_map(|&a| (0..d).map(move |c| (a, c))).map(|(a, c)| (means.arm(a)[c] - origin[c]) / scale).collect();
    let w: Vec<T> = arms.iter().map(|&a| weights[a] / wsum).collect();
    let problem = Problem { d, rows, w, y };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lm, ln) = (local(spec.arm_m), local(spec.arm_n));
    let mut best: Option<(Vec<T>, T, T)> = None;
    for start in 0..cfg.multistarts.max(1) {
        let mut x = problem.y.clone();
        let theta = match start {
            0 => T::zero(),
            1 => T::one(),
            _ => T::lit(rng.gen::<f64>()),
        };
        let wm = problem.w[lm].max(T::epsilon());
        let wn = problem.w[ln].max(T::epsilon());
        for c in 0..d {
            let mid = (wm * x[lm * d + c] + wn * x[ln * d + c]) / (wm + wn);
            x[lm * d + c] = x[lm * d + c] + theta * (mid - x[lm * d + c]);
            x[ln * d + c] = x[ln * d + c] + theta * (mid - x[ln * d + c]);
        }
        if start >= 2 {
            for v in x.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += T::lit(0.1 * z);
            }
        }
        let mut nu = vec![T::zero(); problem.rows.len()];
        let mut rho = T::lit(10.0);
        let mut prev_violation = T::infinity();
        for _ in 0..MAX_OUTER {
            minimize_inner(&problem, &mut x, &nu, rho, cfg);
            let violation = problem.violation(&x);
            let mut shift = T::zero();
            for r in 0..nu.len() {
                let updated = (nu[r] - rho * problem.constraint(&x, r)).max(T::zero());
                shift = shift.max((updated - nu[r]).abs());
                nu[r] = updated;
            }
            if violation <= T::lit(FEASIBILITY_TOL) && shift <= T::lit(cfg.gradient_tolerance).max(T::epsilon().sqrt()) {
                break;
            }
            if violation > T::lit(0.25) * prev_violation {
                rho = (rho * T::lit(10.0)).min(T::lit(1e10));
            }
            prev_violation = violation;
        }
        let violation = problem.violation(&x);
        let value = problem.objective(&x);
        let better = match &best {
            None => true,
            Some((_, bv, bviol)) => {
                let feasible = violation <= T::lit(FEASIBILITY_TOL);
                let best_feasible = *bviol <= T::lit(FEASIBILITY_TOL);
                (feasible && !best_feasible) || (feasible == best_feasible && (value < *bv || (!feasible && violation < *bviol)))
            }
        };
        if better {
            best = Some((x, value, violation));
        }
    }
    let (x, _, violation) = best.expect("at least one start");
    for (i, &a) in arms.iter().enumerate() {
        for c in 0..d {
            lambda.arm_mut(a)[c] = origin[c] + scale * x[i * d + c];
        }
    }
    let value = lambda.weighted_half_sq_dist(means, weights);
    (lambda, value, violation <= T::lit(FEASIBILITY_TOL))
}
