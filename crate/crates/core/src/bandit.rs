//! Bandit state, the GLR stopping rule and the step-wise policy interface.
//!
//! A policy is driven by its caller: [`BanditPolicy::next_action`] names the arm to
//! pull (or stops), and [`BanditPolicy::observe`] feeds back the sample. The caller
//! owns the environment and the random stream.

use crate::cluster::ClusterAssignment;
use crate::error::ClusterError;
use crate::means::MeanMatrix;
use crate::psi::{PsiEvaluator, SolverConfig};
use crate::scalar::Real;

/// Pull counts and running sums.
#[derive(Debug, Clone)]
pub struct BanditState<T> {
    t: u64,
    counts: Vec<u64>,
    sums: MeanMatrix<T>,
}

impl<T: Real> BanditState<T> {
    pub fn new(arms: usize, dim: usize) -> Self {
        Self { t: 0, counts: vec![0; arms], sums: MeanMatrix::zeros(dim, arms) }
    }

    /// Builds a state from known counts and empirical means (for tests and replays).
    pub fn from_counts_and_means(counts: Vec<u64>, means: &MeanMatrix<T>) -> Result<Self, ClusterError> {
        if counts.len() != means.arms() {
            return Err(ClusterError::DimensionMismatch { expected: means.arms(), got: counts.len() });
        }
        let mut sums = means.clone();
        for (m, &n) in counts.iter().enumerate() {
            sums.arm_mut(m).iter_mut().for_each(|v| *v *= T::lit(n as f64));
        }
        Ok(Self { t: counts.iter().sum(), counts, sums })
    }

    pub fn update(&mut self, arm: usize, sample: &[T]) -> Result<(), ClusterError> {
        if arm >= self.counts.len() {
            return Err(ClusterError::ArmOutOfRange { arm, m: self.counts.len() });
        }
        if sample.len() != self.sums.dim() {
            return Err(ClusterError::DimensionMismatch { expected: self.sums.dim(), got: sample.len() });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite("sample"));
        }
        for (s, &x) in self.sums.arm_mut(arm).iter_mut().zip(sample) {
            *s += x;
        }
        self.counts[arm] += 1;
        self.t += 1;
        Ok(())
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.sums.dim()
    }

    pub fn sums(&self) -> &MeanMatrix<T> {
        &self.sums
    }

    /// `None` while some arm has never been pulled.
    pub fn empirical_means(&self) -> Option<MeanMatrix<T>> {
        if self.counts.iter().any(|&n| n == 0) {
            return None;
        }
        let mut means = self.sums.clone();
        for (m, &n) in self.counts.iter().enumerate() {
            let inv = T::one() / T::lit(n as f64);
            means.arm_mut(m).iter_mut().for_each(|v| *v *= inv);
        }
        Some(means)
    }

    /// `N(t) / t`.
    pub fn proportions(&self) -> Vec<T> {
        let t = T::lit(self.t.max(1) as f64);
        self.counts.iter().map(|&n| T::lit(n as f64) / t).collect()
    }
}

/// Running sum of the plug-in allocations `w(s)`.
#[derive(Debug, Clone)]
pub struct TrackingHistory<T> {
    cumulative: Vec<T>,
    steps: u64,
}

impl<T: Real> TrackingHistory<T> {
    pub fn new(arms: usize) -> Self {
        Self { cumulative: vec![T::zero(); arms], steps: 0 }
    }

    pub fn record(&mut self, w: &[T]) {
        for (c, &x) in self.cumulative.iter_mut().zip(w) {
            *c += x;
        }
        self.steps += 1;
    }

    pub fn cumulative(&self) -> &[T] {
        &self.cumulative
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

fn argmin_lowest_index<T: PartialOrd + Copy>(values: impl Iterator<Item = (usize, T)>) -> Option<usize> {
    values.fold(None, |best: Option<(usize, T)>, (i, v)| match best {
        Some((_, b)) if b <= v => best,
        _ => Some((i, v)),
    })
    .map(|(i, _)| i)
}

/// The least pulled arm if its count is below `sqrt(t / M)`.
pub fn forced_exploration_check<T: Real>(state: &BanditState<T>) -> Option<usize> {
    let threshold = (state.t() as f64 / state.arms() as f64).sqrt();
    let arm = argmin_lowest_index(state.counts().iter().copied().enumerate())?;
    ((state.counts()[arm] as f64) < threshold).then_some(arm)
}

/// The arm in the support of the history lagging most behind it:
/// `argmin N_m / t - cumulative_m / t`.
pub fn average_tracking_arm<T: Real>(state: &BanditState<T>, history: &TrackingHistory<T>) -> Result<usize, ClusterError> {
    let t = T::lit(state.t().max(1) as f64);
    let scores = history
        .cumulative()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > T::zero())
        .map(|(m, &c)| (m, T::lit(state.counts()[m] as f64) / t - c / t));
    argmin_lowest_index(scores).ok_or(ClusterError::InvalidWeights { sum: 0.0 })
}

/// `beta(delta, t) = d sum_m log(N_m + 1) + 2 log(1 / delta)`.
pub fn threshold_beta<T: Real>(delta: T, state: &BanditState<T>, dim: usize) -> T {
    let s: T = state.counts().iter().map(|&n| T::lit(n as f64 + 1.0).ln()).sum();
    T::lit(dim as f64) * s + T::lit(2.0) * (T::one() / delta).ln()
}

/// `Z(t) = t psi(N(t)/t, mu_hat(t))`.
pub fn glr_statistic<T: Real>(state: &BanditState<T>, k: usize, config: &SolverConfig) -> Result<T, ClusterError> {
    let means = state.empirical_means().ok_or(ClusterError::NonFinite("empirical means with a zero count"))?;
    let ev = PsiEvaluator::new(&means, k, config)?;
    Ok(glr_from_evaluator(state, &ev))
}

pub(crate) fn glr_from_evaluator<T: Real>(state: &BanditState<T>, ev: &PsiEvaluator<T>) -> T {
    T::lit(state.t() as f64) * ev.evaluate(&state.proportions()).value
}

/// One logged step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<T> {
    pub t: u64,
    pub arm: usize,
    pub z: T,
    pub beta: T,
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunResult<T> {
    /// Total number of samples drawn.
    pub stopping_time: u64,
    pub declared: ClusterAssignment,
    /// Set when the step cap ended the run before the stopping rule fired.
    pub capped: bool,
    /// Filled in by [`run_policy`] when a ground truth is supplied.
    pub correct: Option<bool>,
    pub trace: Option<Vec<TraceEntry<T>>>,
}

/// What a policy wants next.
#[derive(Debug, Clone)]
pub enum Action<T> {
    Pull(usize),
    Stop(RunResult<T>),
}

/// A sequential sampling-and-stopping rule driven one sample at a time.
pub trait BanditPolicy<T: Real> {
    /// Arm to pull next, or the final result. After `Stop` the policy is spent.
    fn next_action(&mut self) -> Result<Action<T>, ClusterError>;

    /// Reports the sample drawn from the arm returned by the last `Pull`.
    fn observe(&mut self, arm: usize, sample: &[T]) -> Result<(), ClusterError>;
}

/// Drives `policy` to completion. `sample(arm, out)` must fill `out` with one draw.
pub fn run_policy<T: Real, P: BanditPolicy<T> + ?Sized>(
    policy: &mut P,
    dim: usize,
    truth: Option<&ClusterAssignment>,
    mut sample: impl FnMut(usize, &mut [T]),
) -> Result<RunResult<T>, ClusterError> {
    let mut buf = vec![T::zero(); dim];
    loop {
        match policy.next_action()? {
            Action::Pull(arm) => {
                sample(arm, &mut buf);
                policy.observe(arm, &buf)?;
            }
            Action::Stop(mut result) => {
                if let Some(truth) = truth {
                    result.correct = Some(result.declared.equivalent(truth)?);
                }
                return Ok(result);
            }
        }
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<(), ClusterError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(ClusterError::InvalidDelta(delta))
    }
}

pub(crate) fn check_clusters(k: usize, m: usize) -> Result<(), ClusterError> {
    if k < 2 || k > m {
        return Err(ClusterError::InvalidClusterCount { k, m });
    }
    if k == m {
        return Err(ClusterError::EmptyAlternative);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with_counts(counts: &[u64]) -> BanditState<f64> {
        let means = MeanMatrix::from_scalars(&vec![0.0; counts.len()]).unwrap();
        BanditState::from_counts_and_means(counts.to_vec(), &means).unwrap()
    }

    #[test]
    fn forced_exploration_examples() {
        assert_eq!(forced_exploration_check(&state_with_counts(&[4, 30, 33, 33])), Some(0));
        assert_eq!(forced_exploration_check(&state_with_counts(&[25, 25, 25, 25])), None);
        assert_eq!(forced_exploration_check(&state_with_counts(&[1, 1, 1, 1])), None);
        assert_eq!(forced_exploration_check(&state_with_counts(&[30, 2, 2, 66])), Some(1));
    }

    #[test]
    fn tracking_examples() {
        let s = state_with_counts(&[5, 5]);
        let mut h = TrackingHistory::new(2);
        h.record(&[7.0, 3.0]);
        assert_eq!(average_tracking_arm(&s, &h).unwrap(), 0);
        let mut h = TrackingHistory::new(2);
        h.record(&[10.0, 0.0]);
        assert_eq!(average_tracking_arm(&s, &h).unwrap(), 0);
        assert!(average_tracking_arm(&s, &TrackingHistory::new(2)).is_err());
    }

    #[test]
    fn beta_examples() {
        let s = state_with_counts(&[3, 1]);
        assert!((threshold_beta(0.1, &s, 1) - 2.0 * (8f64.sqrt() / 0.1).ln()).abs() < 1e-12);
        assert!((threshold_beta(0.1, &s, 1) - 6.6846).abs() < 1e-4);
        let zero = BanditState::<f64>::new(3, 2);
        assert!((threshold_beta(0.1, &zero, 2) - 4.6052).abs() < 1e-4);
        let more = state_with_counts(&[4, 1]);
        assert!(threshold_beta(0.1, &more, 1) > threshold_beta(0.1, &s, 1));
        assert!(threshold_beta(0.01, &s, 1) > threshold_beta(0.1, &s, 1));
    }

    #[test]
    fn state_bookkeeping() {
        let mut s = BanditState::<f64>::new(2, 2);
        assert!(s.empirical_means().is_none());
        s.update(0, &[1.0, 2.0]).unwrap();
        s.update(1, &[3.0, 4.0]).unwrap();
        s.update(0, &[3.0, 0.0]).unwrap();
        assert_eq!(s.t(), 3);
        assert_eq!(s.counts(), &[2, 1]);
        assert_eq!(s.empirical_means().unwrap().arm(0), &[2.0, 1.0]);
        assert!(s.update(2, &[0.0, 0.0]).is_err());
        assert!(s.update(0, &[0.0]).is_err());
        assert!(s.update(0, &[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn glr_matches_grid_oracle() {
        // mu_hat = [0, 0, 1], uniform proportions, t = 300: Z = 300 / 36.
        let means = MeanMatrix::from_scalars(&[0.0, 0.0, 1.0]).unwrap();
        let s = BanditState::from_counts_and_means(vec![100, 100, 100], &means).unwrap();
        let z: f64 = glr_statistic(&s, 2, &SolverConfig::default()).unwrap();
        assert!((z - 300.0 / 36.0).abs() < 1e-9);
        let w = crate::psi::SimplexWeights::uniform(3);
        let grid = crate::psi::grid_oracle_psi(&w, &means, 2, 0.005).unwrap();
        // Grid is an upper bound within its first-order resolution.
        assert!(grid * 300.0 >= z && (grid * 300.0 - z) / z < 0.05);
    }
}
