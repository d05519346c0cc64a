//! Maximization of `w -> psi(w, mu)` over the simplex and the resulting bounds.

use log::warn;
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::{PsiEvaluator, PsiResult, SimplexWeights, SolverConfig};
use crate::error::ClusterError;
use crate::means::MeanMatrix;
use crate::scalar::Real;

/// Characteristic time and an optimal allocation.
#[derive(Debug, Clone)]
pub struct TStar<T> {
    pub t_star: T,
    pub w_star: SimplexWeights<T>,
    /// `psi` at `w_star`, with its active spec and minimizer.
    pub psi: PsiResult<T>,
    /// Certified upper bound on `max_w psi` from the cutting-plane model.
    pub psi_upper_bound: T,
    /// `(upper - psi) / upper` at termination.
    pub relative_gap: T,
}

struct Iterate<T> {
    w: Vec<T>,
    result: PsiResult<T>,
}

/// Frank-Wolfe ascent with adaptive step sizes.
///
/// The linear maximization oracle over the simplex picks the vertex of the largest
/// supergradient entry. A step is kept only if it increases `psi`; otherwise the
/// step size shrinks. `budget` counts `psi` evaluations, including the first.
/// Every evaluation is passed to `visit`.
fn frank_wolfe<T: Real>(
    ev: &PsiEvaluator<T>,
    start: Vec<T>,
    budget: usize,
    initial_step: T,
    rel_tol: T,
    visit: &mut impl FnMut(&PsiResult<T>),
) -> Iterate<T> {
    let result = ev.evaluate(&start);
    visit(&result);
    let mut cur = Iterate { w: start, result };
    let mut step = initial_step;
    let mut trial = vec![T::zero(); cur.w.len()];
    for _ in 1..budget.max(1) {
        let g = &cur.result.arm_costs;
        let (vertex, top) = g.iter().enumerate().fold((0, T::neg_infinity()), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let value = cur.result.value;
        if top - value <= rel_tol * value || step < T::lit(1e-9) {
            break;
        }
        for (i, t) in trial.iter_mut().enumerate() {
            *t = (T::one() - step) * cur.w[i] + if i == vertex { step } else { T::zero() };
        }
        let r = ev.evaluate(&trial);
        visit(&r);
        if r.value > value {
            cur = Iterate { w: trial.clone(), result: r };
            step = (step * T::lit(2.0)).min(T::one());
        } else {
            step = step * T::lit(0.25);
        }
    }
    cur
}

/// Warm-started ascent used for the per-step plug-in allocation.
///
/// Starts from `start` (uniform if `None`) and spends at most `budget` evaluations.
pub fn maximize_psi<T: Real>(ev: &PsiEvaluator<T>, start: Option<&[T]>, budget: usize) -> (Vec<T>, PsiResult<T>) {
    let m = ev.means().arms();
    let (w0, step) = match start {
        Some(w) => (w.to_vec(), T::lit(0.1)),
        None => (vec![T::one() / T::lit(m as f64); m], T::lit(0.5)),
    };
    let it = frank_wolfe(ev, w0, budget, step, T::lit(ev.config().relative_tolerance), &mut |_| {});
    (it.w, it.result)
}

/// Maximizes the piecewise-linear model `min_j c_j . w` over the simplex.
fn cutting_plane_lp(cuts: &[Vec<f64>]) -> Result<(Vec<f64>, f64), ClusterError> {
    let m = cuts[0].len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let z = lp.add_var(1.0, (0.0, f64::INFINITY));
    let simplex: Vec<_> = w.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
    for c in cuts {
        let mut row: Vec<_> = w.iter().zip(c).map(|(&v, &ci)| (v, -ci)).collect();
        row.push((z, 1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, 0.0);
    }
    match lp.solve() {
        Ok(SolveOutcome::Solution(s)) => {
            let mut wv: Vec<f64> = w.iter().map(|&v| s.var_value(v).max(0.0)).collect();
            let total: f64 = wv.iter().sum();
            wv.iter_mut().for_each(|x| *x /= total);
            Ok((wv, s.var_value(z)))
        }
        Ok(other) => Err(ClusterError::LinearProgram(format!("{other:?}"))),
        Err(e) => Err(ClusterError::LinearProgram(e.to_string())),
    }
}

/// `T*(mu) = 1 / max_w psi(w, mu)` with default settings.
pub fn t_star<T: Real>(means: &MeanMatrix<T>, k: usize) -> Result<TStar<T>, ClusterError> {
    t_star_with(means, k, &SolverConfig::default())
}

/// Frank-Wolfe followed by a cutting-plane polish.
///
/// `psi` is a minimum of functions linear in `w`, so each evaluation at `w'` with
/// minimizer `lambda'` yields the valid cut `psi(w) <= c(lambda') . w`. Frank-Wolfe
/// alone stalls at the kinks of this minimum; maximizing the cut model by linear
/// programming and evaluating at its argmax closes the gap.
pub fn t_star_with<T: Real>(means: &MeanMatrix<T>, k: usize, config: &SolverConfig) -> Result<TStar<T>, ClusterError> {
    let ev = PsiEvaluator::new(means, k, config)?;
    let m = means.arms();
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut record = |r: &PsiResult<T>| cuts.push(r.arm_costs.iter().map(|c| c.as_f64()).collect());
    let tol = T::lit(config.relative_tolerance);
    let fw = frank_wolfe(&ev, vec![T::one() / T::lit(m as f64); m], config.max_outer_iterations, T::lit(0.5), tol, &mut record);
    let mut best = fw;
    let mut upper = T::infinity();
    for _ in 0..config.max_outer_iterations {
        let (w_lp, z) = cutting_plane_lp(&cuts)?;
        upper = upper.min(T::lit(z));
        if upper - best.result.value <= tol * upper {
            break;
        }
        let w: Vec<T> = w_lp.iter().map(|&x| T::lit(x)).collect();
        let r = ev.evaluate(&w);
        cuts.push(r.arm_costs.iter().map(|c| c.as_f64()).collect());
        if r.value > best.result.value {
            best = Iterate { w, result: r };
        }
    }
    let value = best.result.value;
    let upper = upper.max(value);
    Ok(TStar {
        t_star: T::one() / value,
        w_star: SimplexWeights::normalized(&best.w)?,
        relative_gap: if upper > T::zero() { (upper - value) / upper } else { T::zero() },
        psi_upper_bound: upper,
        psi: best.result,
    })
}

/// Bernoulli relative entropy `d_kl(a, b)`.
pub fn kl_bernoulli<T: Real>(a: T, b: T) -> Result<T, ClusterError> {
    let open = |x: T| x > T::zero() && x < T::one();
    if !open(a) || !open(b) {
        return Err(ClusterError::InvalidDelta(if open(a) { b.as_f64() } else { a.as_f64() }));
    }
    let one = T::one();
    Ok(a * (a / b).ln() + (one - a) * ((one - a) / (one - b)).ln())
}

/// `d_kl(delta, 1 - delta) * T*(mu)`; zero (with a warning) if the alternative set is empty.
pub fn lower_bound<T: Real>(delta: T, means: &MeanMatrix<T>, k: usize) -> Result<T, ClusterError> {
    let kl = kl_bernoulli(delta, T::one() - delta)?;
    match t_star(means, k) {
        Ok(t) => Ok(kl * t.t_star),
        Err(ClusterError::EmptyAlternative) => {
            warn!("lower bound requested for an instance with an empty alternative set; returning 0");
            Ok(T::zero())
        }
        Err(e) => Err(e),
    }
}
