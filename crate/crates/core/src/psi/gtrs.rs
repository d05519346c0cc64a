//! Exact minimizer for specs with one arm in each part.
//!
//! The problem `min 1/2 sum w_l ||x_l - mu_l||^2` subject to
//! `||x_a - x_b||^2 >= ||x_m - x_n||^2` has a single quadratic constraint, so the
//! S-lemma makes the Lagrangian dual tight. After whitening by `W^{1/2}` the
//! multiplier `nu` solves a scalar secular equation `phi(nu) = 0` on
//! `[0, 1 / lambda_max)`, found by bisection.

use crate::cluster::AltSpec;
use crate::linalg::symmetric_eigen;
use crate::means::MeanMatrix;
use crate::scalar::Real;

/// Returns the minimizer over all arms (untouched arms stay at `mu`) and its cost.
pub(crate) fn solve_single_pair<T: Real>(means: &MeanMatrix<T>, weights: &[T], spec: &AltSpec) -> (MeanMatrix<T>, T) {
    debug_assert!(spec.is_single_pair());
    let arms = spec.involved_arms();
    let s = arms.len();
    let d = means.dim();
    let local = |a: usize| arms.iter().position(|&x| x == a).expect("arm in spec");
    let (a, b, m, n) = (local(spec.part1[0]), local(spec.part2[0]), local(spec.arm_m), local(spec.arm_n));

    let mut h = vec![T::zero(); s * s];
    let mut add_pair = |i: usize, j: usize, sign: T| {
        h[i * s + i] += sign;
        h[j * s + j] += sign;
        h[i * s + j] -= sign;
        h[j * s + i] -= sign;
    };
    add_pair(a, b, T::one());
    add_pair(m, n, -T::one());

    let wmax = arms.iter().map(|&l| weights[l]).fold(T::zero(), T::max);
    let mut lambda = means.clone();
    if wmax == T::zero() {
        // Nothing to pay: collapse the pair so the constraint holds trivially.
        for c in 0..d {
            let mid = (means.arm(spec.arm_m)[c] + means.arm(spec.arm_n)[c]) * T::lit(0.5);
            lambda.arm_mut(spec.arm_m)[c] = mid;
            lambda.arm_mut(spec.arm_n)[c] = mid;
        }
        return (lambda, T::zero());
    }
    let floor = T::weight_floor() * wmax;
    let sqrt_w: Vec<T> = arms.iter().map(|&l| weights[l].max(floor).sqrt()).collect();

    let g_mu: T = (0..d)
        .map(|c| (0..s).flat_map(|i| (0..s).map(move |j| (i, j))).map(|(i, j)| means.arm(arms[i])[c] * h[i * s + j] * means.arm(arms[j])[c]).sum::<T>())
        .sum();
    if g_mu >= T::zero() {
        return (lambda, T::zero());
    }

    let mut ht = vec![T::zero(); s * s];
    for i in 0..s {
        for j in 0..s {
            ht[i * s + j] = h[i * s + j] / (sqrt_w[i] * sqrt_w[j]);
        }
    }
    let (eig, q) = symmetric_eigen(&ht, s);
    // z[i][c]: whitened anchor in eigen coordinates.
    let z: Vec<Vec<T>> = (0..s)
        .map(|i| (0..d).map(|c| (0..s).map(|j| q[j * s + i] * sqrt_w[j] * means.arm(arms[j])[c]).sum()).collect())
        .collect();
    let znorm: Vec<T> = z.iter().map(|zi| zi.iter().map(|&v| v * v).sum()).collect();
    let lmax = eig.iter().copied().fold(T::neg_infinity(), T::max);
    let top_tol = lmax * T::epsilon().sqrt();
    let is_top: Vec<bool> = eig.iter().map(|&l| l >= lmax - top_tol).collect();
    let total: T = znorm.iter().copied().sum();
    let top_mass: T = (0..s).filter(|&i| is_top[i]).map(|i| znorm[i]).sum();

    let phi = |nu: T, include_top: bool| -> T {
        (0..s).filter(|&i| include_top || !is_top[i]).map(|i| eig[i] * znorm[i] / (T::one() - nu * eig[i]).powi(2)).sum()
    };
    let nu_max = T::one() / lmax;
    let hard = top_mass <= total * T::epsilon() && phi(nu_max, false) <= T::zero();

    let (nu, t) = if hard {
        let rest = phi(nu_max, false);
        (nu_max, (-rest / lmax).max(T::zero()).sqrt())
    } else {
        let (mut lo, mut hi) = (T::zero(), nu_max);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid, true) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // The upper end keeps the constraint satisfied.
        (hi, T::zero())
    };

    let top_index = (0..s).find(|&i| is_top[i]).expect("a largest eigenvalue");
    for c in 0..d {
        let y_eig: Vec<T> = (0..s)
            .map(|i| {
                if hard && is_top[i] {
                    if i == top_index && c == 0 {
                        t
                    } else {
                        T::zero()
                    }
                } else {
                    z[i][c] / (T::one() - nu * eig[i])
                }
            })
            .collect();
        for j in 0..s {
            let y: T = (0..s).map(|i| q[j * s + i] * y_eig[i]).sum();
            lambda.arm_mut(arms[j])[c] = y / sqrt_w[j];
        }
    }
    let value = lambda.weighted_half_sq_dist(means, weights);
    (lambda, value)
}
