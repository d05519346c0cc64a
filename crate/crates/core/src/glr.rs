//! Shared skeleton of the GLR-stopped policies.
//!
//! ATBOC and LUCBBOC differ only in how the next arm is chosen once forced
//! exploration is not triggered; both stop when `Z(t) >= beta(delta, t)` and declare
//! the single-linkage clustering of the empirical means.

use crate::bandit::{
    check_clusters, check_delta, forced_exploration_check, glr_from_evaluator, threshold_beta, Action, BanditPolicy,
    BanditState, RunResult, TraceEntry,
};
use crate::cluster::{slink_cluster, ClusterAssignment};
use crate::error::ClusterError;
use crate::psi::{PsiEvaluator, SolverConfig};
use crate::scalar::Real;

/// Settings common to all policies. Fields a policy does not use are ignored.
#[derive(Debug, Clone)]
pub struct PolicyConfig {
    pub delta: f64,
    pub k: usize,
    /// Runs reaching this many samples stop with `capped` set.
    pub step_cap: u64,
    pub record_trace: bool,
    pub solver: SolverConfig,
    /// Frank-Wolfe evaluations for the first plug-in allocation.
    pub initial_budget: usize,
    /// Frank-Wolfe evaluations per step when warm-started from `w(t-1)`.
    pub warm_budget: usize,
    /// Solve `max_w psi` to tolerance at every step instead of warm-starting.
    pub exact_resolve: bool,
}

impl PolicyConfig {
    pub fn new(delta: f64, k: usize) -> Self {
        Self {
            delta,
            k,
            step_cap: 10_000_000,
            record_trace: false,
            solver: SolverConfig::default(),
            initial_budget: 100,
            warm_budget: 25,
            exact_resolve: false,
        }
    }
}

/// The arm choice used when forced exploration is not triggered.
pub trait SamplingRule<T: Real> {
    /// Called after every sample once all arms have been pulled, unless the run stopped.
    fn update(&mut self, state: &BanditState<T>, ev: &PsiEvaluator<T>, config: &PolicyConfig) -> Result<(), ClusterError>;

    fn choose(&mut self, state: &BanditState<T>, ev: &PsiEvaluator<T>, config: &PolicyConfig) -> Result<usize, ClusterError>;
}

/// Round-robin initialization, forced exploration, GLR stopping and the SLINK decision.
pub struct GlrPolicy<T: Real, R> {
    config: PolicyConfig,
    state: BanditState<T>,
    rule: R,
    evaluator: Option<PsiEvaluator<T>>,
    pending: Option<usize>,
    finished: Option<RunResult<T>>,
    trace: Option<Vec<TraceEntry<T>>>,
    last_z: T,
    last_beta: T,
    spent: bool,
}

impl<T: Real, R: SamplingRule<T>> GlrPolicy<T, R> {
    pub fn with_rule(arms: usize, dim: usize, config: PolicyConfig, rule: R) -> Result<Self, ClusterError> {
        check_delta(config.delta)?;
        check_clusters(config.k, arms)?;
        if dim == 0 {
            return Err(ClusterError::EmptyInstance);
        }
        let trace = config.record_trace.then(Vec::new);
        Ok(Self {
            config,
            state: BanditState::new(arms, dim),
            rule,
            evaluator: None,
            pending: None,
            finished: None,
            trace,
            last_z: T::zero(),
            last_beta: T::zero(),
            spent: false,
        })
    }

    pub fn state(&self) -> &BanditState<T> {
        &self.state
    }

    pub fn rule(&self) -> &R {
        &self.rule
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    /// `Z(t)` and `beta(delta, t)` from the latest sample.
    pub fn last_statistic(&self) -> (T, T) {
        (self.last_z, self.last_beta)
    }

    fn result(&mut self, declared: ClusterAssignment, capped: bool) -> RunResult<T> {
        RunResult { stopping_time: self.state.t(), declared, capped, correct: None, trace: self.trace.take() }
    }

    fn capped_declaration(&self) -> Result<ClusterAssignment, ClusterError> {
        match &self.evaluator {
            Some(ev) => Ok(ev.clustering().clone()),
            None => match self.state.empirical_means() {
                Some(means) => slink_cluster(&means, self.config.k),
                // Unpulled arms: every arm its own cluster except the last ones merged.
                None => {
                    let m = self.state.arms();
                    let labels = (0..m).map(|i| i.min(self.config.k - 1)).collect();
                    ClusterAssignment::new(labels, self.config.k)
                }
            },
        }
    }
}

impl<T: Real, R: SamplingRule<T>> BanditPolicy<T> for GlrPolicy<T, R> {
    fn next_action(&mut self) -> Result<Action<T>, ClusterError> {
        if self.spent {
            return Err(ClusterError::PolicyFinished);
        }
        if let Some(done) = self.finished.take() {
            self.spent = true;
            return Ok(Action::Stop(done));
        }
        let t = self.state.t();
        if t >= self.config.step_cap {
            let declared = self.capped_declaration()?;
            self.spent = true;
            return Ok(Action::Stop(self.result(declared, true)));
        }
        let arm = if (t as usize) < self.state.arms() {
            t as usize
        } else if let Some(arm) = forced_exploration_check(&self.state) {
            arm
        } else {
            let ev = self.evaluator.as_ref().expect("evaluator exists after initialization");
            self.rule.choose(&self.state, ev, &self.config)?
        };
        self.pending = Some(arm);
        Ok(Action::Pull(arm))
    }

    fn observe(&mut self, arm: usize, sample: &[T]) -> Result<(), ClusterError> {
        if self.pending != Some(arm) {
            return Err(ClusterError::UnexpectedObservation { expected: self.pending, got: arm });
        }
        self.pending = None;
        self.state.update(arm, sample)?;
        let Some(means) = self.state.empirical_means() else {
            return Ok(());
        };
        let ev = PsiEvaluator::new(&means, self.config.k, &self.config.solver)?;
        let z = glr_from_evaluator(&self.state, &ev);
        let beta = threshold_beta(T::lit(self.config.delta), &self.state, self.state.dim());
        self.last_z = z;
        self.last_beta = beta;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry { t: self.state.t(), arm, z, beta });
        }
        if z >= beta {
            let declared = ev.clustering().clone();
            self.evaluator = Some(ev);
            self.finished = Some(self.result(declared, false));
            return Ok(());
        }
        self.rule.update(&self.state, &ev, &self.config)?;
        self.evaluator = Some(ev);
        Ok(())
    }
}
