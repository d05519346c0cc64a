//! Elimination on gap confidence bounds for one-dimensional arms.
//!
//! Every arm has a right slot (the gap to the next higher arm) and a left slot
//! (the gap to the next lower arm). Each round samples every arm with an
//! undecided slot, then moves slots to `Finished` (not a top gap) or `Selected`
//! (a top gap) when the confidence bounds allow it.

use std::collections::VecDeque;

use crate::bandit::{check_clusters, check_delta, Action, BanditPolicy, RunResult};
use crate::cluster::ClusterAssignment;
use crate::error::ClusterError;
use crate::glr::PolicyConfig;
use crate::scalar::Real;

/// `c_n = sqrt((2/n) log(4 M n^2 / delta))`.
pub fn confidence_param<T: Real>(n: u64, delta: T, arms: usize) -> Result<T, ClusterError> {
    if n == 0 {
        return Err(ClusterError::NonFinite("confidence parameter at zero count"));
    }
    let n = T::lit(n as f64);
    Ok((T::lit(2.0) / n * (T::lit(4.0 * arms as f64) * n * n / delta).ln()).sqrt())
}

fn reflect<T: Real>(lo: &[T], hi: &[T]) -> (Vec<T>, Vec<T>) {
    (hi.iter().map(|&x| -x).collect(), lo.iter().map(|&x| -x).collect())
}

/// `G(x)`: distance from `x` to the nearest upper bound among intervals starting
/// above `x`, or to the highest other upper bound if none does.
fn g_right<T: Real>(lo: &[T], hi: &[T], m: usize, x: T) -> T {
    let above = (0..lo.len()).filter(|&j| lo[j] > x).map(|j| hi[j]).fold(T::infinity(), T::min);
    if above.is_finite() {
        above - x
    } else {
        (0..hi.len()).filter(|&j| j != m).map(|j| hi[j]).fold(T::neg_infinity(), T::max) - x
    }
}

/// `U Delta_m^r`: largest gap that could open directly above arm `m`.
pub fn max_right_gap<T: Real>(lo: &[T], hi: &[T], m: usize) -> T {
    (0..lo.len())
        .filter(|&j| lo[j] >= lo[m] && lo[j] <= hi[m])
        .map(|j| g_right(lo, hi, m, lo[j]))
        .fold(T::neg_infinity(), T::max)
}

/// `U Delta_m^l`, the reflection of [`max_right_gap`].
pub fn max_left_gap<T: Real>(lo: &[T], hi: &[T], m: usize) -> T {
    let (l, h) = reflect(lo, hi);
    max_right_gap(&l, &h, m)
}

/// `L Delta_m^r`: positive only when arm `m`'s interval is isolated and some
/// interval lies entirely above it.
pub fn min_right_gap<T: Real>(lo: &[T], hi: &[T], m: usize) -> T {
    let isolated = (0..lo.len()).all(|j| j == m || hi[j] < lo[m] || lo[j] > hi[m]);
    let above = (0..lo.len()).filter(|&j| lo[j] > hi[m]).map(|j| lo[j]).fold(T::infinity(), T::min);
    if isolated && above.is_finite() {
        above - hi[m]
    } else {
        T::zero()
    }
}

/// `L Delta_m^l`, the reflection of [`min_right_gap`].
pub fn min_left_gap<T: Real>(lo: &[T], hi: &[T], m: usize) -> T {
    let (l, h) = reflect(lo, hi);
    min_right_gap(&l, &h, m)
}

/// Arms by decreasing empirical mean, lowest index first on ties.
pub fn rank_arms<T: Real>(means: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].partial_cmp(&means[a]).expect("finite means").then(a.cmp(&b)));
    order
}

/// Bounds on every rank gap `k = 1..M-1`: `(L Delta^k, U Delta^k)` in rank order.
fn rank_gap_bounds<T: Real>(means: &[T], lo: &[T], hi: &[T]) -> (Vec<T>, Vec<T>) {
    let order = rank_arms(means);
    let m = order.len();
    let mut suffix_hi = vec![T::neg_infinity(); m + 1];
    let mut suffix_lo = vec![T::neg_infinity(); m + 1];
    for i in (0..m).rev() {
        suffix_hi[i] = suffix_hi[i + 1].max(hi[order[i]]);
        suffix_lo[i] = suffix_lo[i + 1].max(lo[order[i]]);
    }
    let (mut prefix_lo, mut prefix_hi) = (T::infinity(), T::infinity());
    let mut lower = Vec::with_capacity(m - 1);
    let mut upper = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        prefix_lo = prefix_lo.min(lo[order[i]]);
        prefix_hi = prefix_hi.min(hi[order[i]]);
        lower.push(prefix_lo - suffix_hi[i + 1]);
        upper.push(prefix_hi - suffix_lo[i + 1]);
    }
    (lower, upper)
}

fn kth_largest<T: Real>(mut v: Vec<T>, k: usize) -> T {
    v.sort_by(|a, b| b.partial_cmp(a).expect("finite bounds"));
    v[k - 1]
}

/// `(L Delta^(k), U Delta^(k))`: the k-th largest gap lower and upper bounds.
pub fn kth_gap_bounds<T: Real>(means: &[T], lo: &[T], hi: &[T], k: usize) -> Result<(T, T), ClusterError> {
    let m = means.len();
    if k == 0 || k >= m {
        return Err(ClusterError::InvalidClusterCount { k, m });
    }
    let (lower, upper) = rank_gap_bounds(means, lo, hi);
    Ok((kth_largest(lower, k), kth_largest(upper, k)))
}

/// Everything the elimination tests read in one round.
#[derive(Debug, Clone)]
pub struct GapLedger<T> {
    pub max_right: Vec<T>,
    pub max_left: Vec<T>,
    pub min_right: Vec<T>,
    pub min_left: Vec<T>,
    /// `L Delta^(K-1)`.
    pub lower_top: T,
    /// `U Delta^(K)`.
    pub upper_next: T,
    /// `U Delta^(K-1)` and `L Delta^(K)`, for diagnostics.
    pub upper_top: T,
    pub lower_next: T,
}

impl<T: Real> GapLedger<T> {
    pub fn compute(means: &[T], lo: &[T], hi: &[T], k: usize) -> Result<Self, ClusterError> {
        let m = means.len();
        if k < 2 || k >= m {
            return Err(ClusterError::InvalidClusterCount { k, m });
        }
        let (lower, upper) = rank_gap_bounds(means, lo, hi);
        Ok(Self {
            max_right: (0..m).map(|a| max_right_gap(lo, hi, a)).collect(),
            max_left: (0..m).map(|a| max_left_gap(lo, hi, a)).collect(),
            min_right: (0..m).map(|a| min_right_gap(lo, hi, a)).collect(),
            min_left: (0..m).map(|a| min_left_gap(lo, hi, a)).collect(),
            lower_top: kth_largest(lower.clone(), k - 1),
            lower_next: kth_largest(lower, k),
            upper_top: kth_largest(upper.clone(), k - 1),
            upper_next: kth_largest(upper, k),
        })
    }
}

/// Status of one side slot of an arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Active,
    /// Does not border a top gap.
    Finished,
    /// Borders a top gap.
    Selected,
}

/// Counts, sums and side statuses.
#[derive(Debug, Clone)]
pub struct ElimState<T> {
    counts: Vec<u64>,
    sums: Vec<T>,
    right: Vec<Side>,
    left: Vec<Side>,
    t: u64,
    rounds: u64,
}

impl<T: Real> ElimState<T> {
    fn new(m: usize) -> Self {
        Self {
            counts: vec![0; m],
            sums: vec![T::zero(); m],
            right: vec![Side::Active; m],
            left: vec![Side::Active; m],
            t: 0,
            rounds: 0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn right(&self) -> &[Side] {
        &self.right
    }

    pub fn left(&self) -> &[Side] {
        &self.left
    }

    /// Empirical means; zero for unpulled arms.
    pub fn means(&self) -> Vec<T> {
        self.sums.iter().zip(&self.counts).map(|(&s, &n)| if n == 0 { T::zero() } else { s / T::lit(n as f64) }).collect()
    }

    /// `(l_m, r_m)` for every arm.
    pub fn intervals(&self, delta: T) -> Result<(Vec<T>, Vec<T>), ClusterError> {
        let means = self.means();
        let m = self.counts.len();
        let mut lo = Vec::with_capacity(m);
        let mut hi = Vec::with_capacity(m);
        for (a, &n) in self.counts.iter().enumerate() {
            let c = confidence_param(n, delta, m)?;
            lo.push(means[a] - c);
            hi.push(means[a] + c);
        }
        Ok((lo, hi))
    }

    /// Arms with at least one undecided slot.
    pub fn active(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&a| self.right[a] == Side::Active || self.left[a] == Side::Active).collect()
    }

    /// Finished and selected slot counts over the slots that border a gap
    /// in the current empirical order.
    pub fn slot_counts(&self) -> (usize, usize) {
        let order = rank_arms(&self.means());
        let (top, bottom) = (order[0], order[order.len() - 1]);
        let mut finished = 0;
        let mut selected = 0;
        let slots = self.right.iter().enumerate().filter(|&(a, _)| a != top).chain(self.left.iter().enumerate().filter(|&(a, _)| a != bottom));
        for (_, s) in slots {
            match s {
                Side::Finished => finished += 1,
                Side::Selected => selected += 1,
                Side::Active => {}
            }
        }
        (finished, selected)
    }

    /// Cuts the empirical order at the `k - 1` gaps most supported by the slot statuses.
    ///
    /// A gap is ranked by whether a bordering slot was selected, then whether none
    /// was finished, then by its empirical size.
    pub fn declare(&self, k: usize) -> Result<ClusterAssignment, ClusterError> {
        let means = self.means();
        let order = rank_arms(&means);
        let m = order.len();
        let mut gaps: Vec<(usize, (bool, bool, T))> = (0..m - 1)
            .map(|p| {
                let (upper, lower) = (order[p], order[p + 1]);
                let selected = self.right[lower] == Side::Selected || self.left[upper] == Side::Selected;
                let finished = self.right[lower] == Side::Finished || self.left[upper] == Side::Finished;
                (p, (selected, !finished, means[upper] - means[lower]))
            })
            .collect();
        gaps.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite means").then(a.0.cmp(&b.0)));
        let mut cuts: Vec<usize> = gaps[..k - 1].iter().map(|g| g.0).collect();
        cuts.sort_unstable();
        let mut labels = vec![0; m];
        let mut label = 0;
        for (p, &arm) in order.iter().enumerate() {
            labels[arm] = label;
            if cuts.contains(&p) {
                label += 1;
            }
        }
        Ok(ClusterAssignment::new(labels, k)?.canonical())
    }
}

/// The BOC-Elim policy. Samples are pulled round by round in increasing arm order.
pub struct BocElim<T> {
    config: PolicyConfig,
    state: ElimState<T>,
    queue: VecDeque<usize>,
    finished: Option<RunResult<T>>,
    spent: bool,
}

impl<T: Real> BocElim<T> {
    pub fn new(arms: usize, dim: usize, config: PolicyConfig) -> Result<Self, ClusterError> {
        if dim != 1 {
            return Err(ClusterError::UnsupportedDimension { algorithm: "BOC-Elim", d: dim });
        }
        check_delta(config.delta)?;
        check_clusters(config.k, arms)?;
        Ok(Self { config, state: ElimState::new(arms), queue: (0..arms).collect(), finished: None, spent: false })
    }

    pub fn state(&self) -> &ElimState<T> {
        &self.state
    }

    fn stop(&mut self, capped: bool) -> Result<(), ClusterError> {
        let declared = self.state.declare(self.config.k)?;
        self.finished = Some(RunResult { stopping_time: self.state.t, declared, capped, correct: None, trace: None });
        Ok(())
    }

    fn end_round(&mut self) -> Result<(), ClusterError> {
        let delta = T::lit(self.config.delta);
        let k = self.config.k;
        let m = self.state.counts.len();
        let s = &mut self.state;
        s.rounds += 1;
        let means = s.means();
        let (lo, hi) = s.intervals(delta)?;
        let ledger = GapLedger::compute(&means, &lo, &hi, k)?;
        for a in s.active() {
            if s.right[a] == Side::Active {
                if ledger.max_right[a] < ledger.lower_top {
                    s.right[a] = Side::Finished;
                } else if ledger.min_right[a] > ledger.upper_next {
                    s.right[a] = Side::Selected;
                }
            }
            if s.left[a] == Side::Active {
                if ledger.max_left[a] < ledger.lower_top {
                    s.left[a] = Side::Finished;
                } else if ledger.min_left[a] > ledger.upper_next {
                    s.left[a] = Side::Selected;
                }
            }
        }
        let (finished, selected) = s.slot_counts();
        let active = s.active();
        if finished >= 2 * (m - k) || selected >= 2 * (k - 1) || active.is_empty() {
            return self.stop(false);
        }
        self.queue = active.into();
        Ok(())
    }
}

impl<T: Real> BanditPolicy<T> for BocElim<T> {
    fn next_action(&mut self) -> Result<Action<T>, ClusterError> {
        if self.spent {
            return Err(ClusterError::PolicyFinished);
        }
        if self.finished.is_none() && self.state.t >= self.config.step_cap {
            self.stop(true)?;
        }
        if let Some(done) = self.finished.take() {
            self.spent = true;
            return Ok(Action::Stop(done));
        }
        Ok(Action::Pull(*self.queue.front().expect("queue refilled after every round")))
    }

    fn observe(&mut self, arm: usize, sample: &[T]) -> Result<(), ClusterError> {
        let expected = self.queue.front().copied();
        if expected != Some(arm) || self.finished.is_some() {
            return Err(ClusterError::UnexpectedObservation { expected, got: arm });
        }
        if sample.len() != 1 {
            return Err(ClusterError::DimensionMismatch { expected: 1, got: sample.len() });
        }
        if !sample[0].is_finite() {
            return Err(ClusterError::NonFinite("sample"));
        }
        self.queue.pop_front();
        self.state.counts[arm] += 1;
        self.state.sums[arm] += sample[0];
        self.state.t += 1;
        if self.queue.is_empty() {
            self.end_round()?;
        }
        Ok(())
    }
}

/// Right-side hardness on values sorted in decreasing order.
/// `top_right` holds the positions whose right slot borders a top gap.
fn rho_right<T: Real>(v: &[T], top_right: &[bool], top_gap: T, next_gap: T) -> Vec<T> {
    let m = v.len();
    let (four, eight) = (T::lit(4.0), T::lit(8.0));
    (0..m)
        .map(|q| {
            if top_right[q] {
                let first = if q + 1 == m { T::infinity() } else { (v[q] - v[q + 1]) / four };
                first.min((v[q - 1] - v[q] - next_gap) / eight)
            } else {
                let first = if q == 0 {
                    T::infinity()
                } else {
                    (0..q).map(|j| ((v[j] - v[q]) / four).min((top_gap - (v[j] - v[q])) / eight)).fold(T::neg_infinity(), T::max)
                };
                first.max((top_gap - (v[0] - v[q])) / eight)
            }
        })
        .collect()
}

/// Hardness `rho_m = min(rho_m^r, rho_m^l)` per arm, in input order.
///
/// Arms whose slot on one side borders no gap get an infinite value on that side.
pub fn hardness_rho<T: Real>(means: &[T], k: usize) -> Result<Vec<T>, ClusterError> {
    let m = means.len();
    if k < 2 || k > m {
        return Err(ClusterError::InvalidClusterCount { k, m });
    }
    if means.iter().any(|x| !x.is_finite()) {
        return Err(ClusterError::NonFinite("means"));
    }
    let order = rank_arms(means);
    let v: Vec<T> = order.iter().map(|&a| means[a]).collect();
    let gaps: Vec<T> = v.windows(2).map(|w| w[0] - w[1]).collect();
    if gaps.iter().any(|&g| g <= T::zero()) {
        return Err(ClusterError::UndefinedHardness("duplicate means"));
    }
    let mut by_size: Vec<usize> = (0..m - 1).collect();
    by_size.sort_by(|&a, &b| gaps[b].partial_cmp(&gaps[a]).expect("finite gaps"));
    let top_gap = gaps[by_size[k - 2]];
    let next_gap = if k < m { gaps[by_size[k - 1]] } else { T::zero() };
    if k < m && top_gap == next_gap {
        return Err(ClusterError::UndefinedHardness("tied top gaps"));
    }
    let mut top_right = vec![false; m];
    let mut top_right_mirror = vec![false; m];
    for &p in &by_size[..k - 1] {
        top_right[p + 1] = true;
        top_right_mirror[m - 1 - p] = true;
    }
    let right = rho_right(&v, &top_right, top_gap, next_gap);
    let mirrored: Vec<T> = v.iter().rev().map(|&x| -x).collect();
    let left = rho_right(&mirrored, &top_right_mirror, top_gap, next_gap);
    let mut rho = vec![T::zero(); m];
    for (q, &arm) in order.iter().enumerate() {
        rho[arm] = right[q].min(left[m - 1 - q]);
    }
    Ok(rho)
}

/// `sum_m 23 log(M / (delta rho_m)) / rho_m^2`, from given hardness values.
pub fn sample_bound_from_rho<T: Real>(rho: &[T], delta: T) -> T {
    let m = T::lit(rho.len() as f64);
    rho.iter().filter(|r| r.is_finite()).map(|&r| T::lit(23.0) * (m / (delta * r)).ln() / (r * r)).sum()
}

/// High-probability bound on the total number of BOC-Elim samples.
pub fn predicted_sample_bound<T: Real>(means: &[T], k: usize, delta: T) -> Result<T, ClusterError> {
    Ok(sample_bound_from_rho(&hardness_rho(means, k)?, delta))
}

#[cfg(test)]
mod tests;
