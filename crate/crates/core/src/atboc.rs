//! Average tracking of the plug-in optimal allocation.

use crate::bandit::{average_tracking_arm, BanditState, TrackingHistory};
use crate::error::ClusterError;
use crate::glr::{GlrPolicy, PolicyConfig, SamplingRule};
use crate::psi::{maximize_psi, t_star_with, PsiEvaluator};
use crate::scalar::Real;

/// Keeps `sum_s w(s)` where `w(s)` maximizes `psi(., mu_hat(s))`.
#[derive(Debug, Clone)]
pub struct TrackingRule<T> {
    history: TrackingHistory<T>,
    last: Option<Vec<T>>,
}

impl<T: Real> TrackingRule<T> {
    pub fn new(arms: usize) -> Self {
        Self { history: TrackingHistory::new(arms), last: None }
    }

    pub fn history(&self) -> &TrackingHistory<T> {
        &self.history
    }

    /// The most recent plug-in allocation `w(t)`.
    pub fn last_allocation(&self) -> Option<&[T]> {
        self.last.as_deref()
    }
}

impl<T: Real> SamplingRule<T> for TrackingRule<T> {
    fn update(&mut self, _state: &BanditState<T>, ev: &PsiEvaluator<T>, config: &PolicyConfig) -> Result<(), ClusterError> {
        let w = if config.exact_resolve {
            t_star_with(ev.means(), config.k, ev.config())?.w_star.into_vec()
        } else {
            let budget = if self.last.is_some() { config.warm_budget } else { config.initial_budget };
            maximize_psi(ev, self.last.as_deref(), budget).0
        };
        self.history.record(&w);
        self.last = Some(w);
        Ok(())
    }

    fn choose(&mut self, state: &BanditState<T>, _ev: &PsiEvaluator<T>, _config: &PolicyConfig) -> Result<usize, ClusterError> {
        average_tracking_arm(state, &self.history)
    }
}

/// The ATBOC policy.
pub type Atboc<T> = GlrPolicy<T, TrackingRule<T>>;

impl<T: Real> Atboc<T> {
    pub fn new(arms: usize, dim: usize, config: PolicyConfig) -> Result<Self, ClusterError> {
        GlrPolicy::with_rule(arms, dim, config, TrackingRule::new(arms))
    }
}
