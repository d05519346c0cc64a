//! LUCB-style sampling on inter- and intra-cluster gap confidence bounds.

use crate::bandit::BanditState;
use crate::cluster::{slink_split, ClusterAssignment};
use crate::error::ClusterError;
use crate::glr::{GlrPolicy, PolicyConfig, SamplingRule};
use crate::means::MeanMatrix;
use crate::psi::PsiEvaluator;
use crate::scalar::Real;

/// `alpha = sqrt((2/N) log(2^(d+1) M N^2 / delta))`.
pub fn confidence_radius<T: Real>(count: u64, delta: T, arms: usize, dim: usize) -> Result<T, ClusterError> {
    if count == 0 {
        return Err(ClusterError::NonFinite("confidence radius at zero count"));
    }
    let n = T::lit(count as f64);
    let log_term = T::lit((dim + 1) as f64) * T::lit(2.0).ln() + (T::lit(arms as f64) * n * n / delta).ln();
    Ok((T::lit(2.0) / n * log_term).sqrt())
}

/// Empirical gap between two arms (unsquared norm) with its confidence bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds<T> {
    pub empirical: T,
    pub upper: T,
    pub lower: T,
}

impl<T: Real> GapBounds<T> {
    pub fn new(means: &MeanMatrix<T>, radii: &[T], i: usize, j: usize) -> Self {
        let empirical = means.dist(i, j);
        let width = radii[i] + radii[j];
        Self { empirical, upper: empirical + width, lower: empirical - width }
    }
}

fn closest_pair<T: Real>(means: &MeanMatrix<T>, a: &[usize], b: &[usize]) -> (usize, usize) {
    let mut best = (T::infinity(), 0, 0);
    for &i in a {
        for &j in b {
            let d = means.sq_dist(i, j);
            let key = (i.min(j), i.max(j));
            if d < best.0 || (d == best.0 && key < (best.1, best.2)) {
                best = (d, key.0, key.1);
            }
        }
    }
    (best.1, best.2)
}

/// The candidate set `A`: the cross-cluster pair with the smallest gap lower bound and
/// the within-cluster bridge with the largest gap upper bound. Sorted, without duplicates.
pub fn lucbboc_candidates<T: Real>(
    means: &MeanMatrix<T>,
    counts: &[u64],
    clustering: &ClusterAssignment,
    delta: T,
) -> Result<Vec<usize>, ClusterError> {
    let m = means.arms();
    if counts.len() != m || clustering.num_arms() != m {
        return Err(ClusterError::DimensionMismatch { expected: m, got: counts.len() });
    }
    let radii = counts.iter().map(|&n| confidence_radius(n, delta, m, means.dim())).collect::<Result<Vec<T>, _>>()?;
    let clusters = clustering.clusters();
    let mut inter: Option<(T, (usize, usize))> = None;
    for p in 0..clusters.len() {
        for q in p + 1..clusters.len() {
            let (i, j) = closest_pair(means, &clusters[p], &clusters[q]);
            let lower = GapBounds::new(means, &radii, i, j).lower;
            if inter.map_or(true, |(b, _)| lower < b) {
                inter = Some((lower, (i, j)));
            }
        }
    }
    let mut intra: Option<(T, (usize, usize))> = None;
    for members in &clusters {
        if let Some((_, _, (a, b))) = slink_split(means, members) {
            let upper = GapBounds::new(means, &radii, a, b).upper;
            if intra.map_or(true, |(b, _)| upper > b) {
                intra = Some((upper, (a, b)));
            }
        }
    }
    let mut set: Vec<usize> = [inter, intra].into_iter().flatten().flat_map(|(_, (a, b))| [a, b]).collect();
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

/// The least sampled member of [`lucbboc_candidates`], lowest index on ties.
pub fn lucbboc_select<T: Real>(
    means: &MeanMatrix<T>,
    counts: &[u64],
    clustering: &ClusterAssignment,
    delta: T,
) -> Result<usize, ClusterError> {
    let set = lucbboc_candidates(means, counts, clustering, delta)?;
    set.into_iter().min_by_key(|&a| (counts[a], a)).ok_or(ClusterError::EmptyAlternative)
}

/// Sampling rule of LUCBBOC; stateless.
#[derive(Debug, Clone, Copy, Default)]
pub struct LucbRule;

impl<T: Real> SamplingRule<T> for LucbRule {
    fn update(&mut self, _: &BanditState<T>, _: &PsiEvaluator<T>, _: &PolicyConfig) -> Result<(), ClusterError> {
        Ok(())
    }

    fn choose(&mut self, state: &BanditState<T>, ev: &PsiEvaluator<T>, config: &PolicyConfig) -> Result<usize, ClusterError> {
        lucbboc_select(ev.means(), state.counts(), ev.clustering(), T::lit(config.delta))
    }
}

/// The LUCBBOC policy: ATBOC with [`LucbRule`] in place of tracking.
pub type Lucbboc<T> = GlrPolicy<T, LucbRule>;

impl<T: Real> Lucbboc<T> {
    pub fn new(arms: usize, dim: usize, config: PolicyConfig) -> Result<Self, ClusterError> {
        GlrPolicy::with_rule(arms, dim, config, LucbRule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::run_policy;
    use crate::cluster::slink_cluster;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn radius_examples() {
        let a: f64 = confidence_radius(1, 0.1, 2, 1).unwrap();
        assert!((a - (2.0 * 80f64.ln()).sqrt()).abs() < 1e-12);
        assert!((a - 2.9603).abs() < 5e-4);
        assert!(confidence_radius::<f64>(0, 0.1, 2, 1).is_err());
        let far: f64 = confidence_radius(1_000_000, 0.1, 2, 1).unwrap();
        assert!(far < 0.01);
        let mut prev = confidence_radius::<f64>(3, 0.1, 5, 2).unwrap();
        for n in 4..200 {
            let a = confidence_radius::<f64>(n, 0.1, 5, 2).unwrap();
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn select_example() {
        let means = MeanMatrix::from_scalars(&[0.0, 0.1, 5.0]).unwrap();
        let c = slink_cluster(&means, 2).unwrap();
        assert_eq!(lucbboc_candidates(&means, &[4, 4, 4], &c, 0.1).unwrap(), vec![0, 1, 2]);
        assert_eq!(lucbboc_select(&means, &[4, 4, 4], &c, 0.1).unwrap(), 0);
        assert_eq!(lucbboc_select(&means, &[5, 4, 4], &c, 0.1).unwrap(), 1);
        assert_eq!(lucbboc_select(&means, &[5, 5, 4], &c, 0.1).unwrap(), 2);
    }

    #[test]
    fn equal_columns_within_cluster() {
        let means = MeanMatrix::from_scalars(&[1.0, 1.0, 5.0]).unwrap();
        let c = slink_cluster(&means, 2).unwrap();
        let radii = [0.3f64, 0.3, 0.3];
        let g = GapBounds::new(&means, &radii, 0, 1);
        assert_eq!(g.empirical, 0.0);
        assert!((g.upper - 0.6).abs() < 1e-15);
        assert_eq!(lucbboc_select(&means, &[2, 3, 3], &c, 0.1).unwrap(), 0);
    }

    #[test]
    fn singleton_clusters_keep_inter_pair_only() {
        let means = MeanMatrix::from_scalars(&[0.0, 1.0, 3.0, 3.5]).unwrap();
        let c = slink_cluster(&means, 3).unwrap();
        // {0}, {1}, {2, 3}: inter pair (0, 1), intra bridge (2, 3).
        let set = lucbboc_candidates(&means, &[3, 3, 3, 3], &c, 0.1).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3]);
        let means = MeanMatrix::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
        let c = slink_cluster(&means, 2).unwrap();
        let all_single = ClusterAssignment::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(lucbboc_candidates(&means, &[1, 1, 1], &all_single, 0.1).unwrap(), vec![0, 1]);
        assert_eq!(lucbboc_candidates(&means, &[1, 1, 1], &c, 0.1).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn zero_variance_environment_declares_truth() {
        let means = MeanMatrix::from_scalars(&[0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0]).unwrap();
        let truth = ClusterAssignment::from_one_based(&[1, 1, 1, 2, 2, 3, 3]).unwrap();
        let mut policy = Lucbboc::new(7, 1, PolicyConfig::new(0.1, 3)).unwrap();
        let r = run_policy(&mut policy, 1, Some(&truth), |arm, out| out[0] = means.arm(arm)[0]).unwrap();
        assert_eq!(r.correct, Some(true));
        assert!(!r.capped);
    }

    #[test]
    fn counts_diverge_without_stopping() {
        let means = MeanMatrix::from_arms(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0], vec![5.0, 6.0]]).unwrap();
        let mut state = BanditState::<f64>::new(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = [0.0; 2];
        for t in 0..4000 {
            let arm = if t < 4 {
                t
            } else {
                crate::bandit::forced_exploration_check(&state).unwrap_or_else(|| {
                    let mu_hat = state.empirical_means().unwrap();
                    let c = slink_cluster(&mu_hat, 2).unwrap();
                    lucbboc_select(&mu_hat, state.counts(), &c, 0.1).unwrap()
                })
            };
            for (o, &mu) in x.iter_mut().zip(means.arm(arm)) {
                *o = mu + rng.sample::<f64, _>(StandardNormal);
            }
            state.update(arm, &x).unwrap();
        }
        assert!(state.counts().iter().all(|&n| n >= 30), "{:?}", state.counts());
    }

    proptest! {
        #[test]
        fn bounds_bracket_and_selection_in_set(
            xs in prop::collection::vec(-5.0f64..5.0, 4..8),
            counts in prop::collection::vec(1u64..50, 8),
            k in 2usize..4,
        ) {
            let m = xs.len();
            let means = MeanMatrix::from_scalars(&xs).unwrap();
            let c = slink_cluster(&means, k).unwrap();
            let counts = &counts[..m];
            let set = lucbboc_candidates(&means, counts, &c, 0.1).unwrap();
            prop_assert!(!set.is_empty() && set.len() <= 4);
            let arm = lucbboc_select(&means, counts, &c, 0.1).unwrap();
            prop_assert!(set.contains(&arm));
            let radii: Vec<f64> = counts.iter().map(|&n| confidence_radius(n, 0.1, m, 1).unwrap()).collect();
            for i in 0..m {
                for j in 0..m {
                    let g = GapBounds::new(&means, &radii, i, j);
                    prop_assert!(g.lower <= g.empirical && g.empirical <= g.upper);
                    prop_assert!(((g.upper - g.empirical) - (g.empirical - g.lower)).abs() < 1e-9);
                }
            }
        }
    }
}
