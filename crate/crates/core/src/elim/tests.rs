use super::*;
use crate::bandit::run_policy;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DATASET2: [f64; 7] = [0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0];

#[test]
fn confidence_param_examples() {
    let c: f64 = confidence_param(1, 0.1, 2).unwrap();
    assert!((c - (2.0 * 80f64.ln()).sqrt()).abs() < 1e-12);
    assert!((c - 2.9603).abs() < 5e-4);
    assert!(confidence_param::<f64>(0, 0.1, 2).is_err());
    let mut prev = confidence_param::<f64>(3, 0.1, 7).unwrap();
    for n in 4..500 {
        let c = confidence_param::<f64>(n, 0.1, 7).unwrap();
        assert!(c < prev);
        prev = c;
    }
}

#[test]
fn max_right_gap_examples() {
    let (lo, hi) = ([0.0, 2.0, 4.0], [1.0, 3.0, 5.0]);
    assert_eq!(max_right_gap(&lo, &hi, 0), 3.0);
    // Arm 2 is the highest: no interval starts above it.
    assert_eq!(max_right_gap(&lo, &hi, 2), 3.0 - 4.0);
    assert_eq!(max_left_gap(&lo, &hi, 2), 5.0 - 2.0);
    let (lo, hi) = ([0.0; 3], [1.0; 3]);
    assert_eq!(max_right_gap(&lo, &hi, 0), 1.0);
}

#[test]
fn min_right_gap_examples() {
    assert_eq!(min_right_gap(&[0.0, 0.5], &[1.0, 2.0], 0), 0.0);
    assert_eq!(min_right_gap(&[0.0, 2.0], &[1.0, 3.0], 1), 0.0);
    assert!((min_right_gap(&[0.0f64, 1.7], &[1.0, 2.5], 0) - 0.7).abs() < 1e-12);
    assert!((min_left_gap(&[0.0f64, 1.7], &[1.0, 2.5], 1) - 0.7).abs() < 1e-12);
}

#[test]
fn kth_gap_two_arms() {
    let (means, lo, hi) = ([2.0, 0.0], [1.5, -0.5], [2.5, 0.5]);
    let (l, u) = kth_gap_bounds(&means, &lo, &hi, 1).unwrap();
    assert_eq!(l, 1.5 - 0.5);
    assert_eq!(u, 2.5 + 0.5);
    assert!(kth_gap_bounds(&means, &lo, &hi, 2).is_err());
}

#[test]
fn hardness_two_arms() {
    let rho = hardness_rho(&[1.0, 0.0], 2).unwrap();
    assert_eq!(rho, vec![0.125, 0.125]);
}

#[test]
fn hardness_dataset2_golden() {
    let rho = hardness_rho(&DATASET2, 3).unwrap();
    assert!(rho.iter().all(|&r| (r - 0.125).abs() < 1e-12));
    let bound = predicted_sample_bound(&DATASET2, 3, 0.1).unwrap();
    assert!((bound - 65203.06061954562).abs() < 1e-6);
}

#[test]
fn hardness_asymmetric_golden() {
    let means = [3.2, 0.0, 5.7, 1.1, 0.4, 5.0, 2.9];
    let expected = [0.075, 0.1, 0.1375, 0.1375, 0.1375, 0.1375, 0.075];
    let rho: Vec<f64> = hardness_rho(&means, 3).unwrap();
    for (r, e) in rho.iter().zip(expected) {
        assert!((r - e).abs() < 1e-12, "{rho:?}");
    }
}

#[test]
fn hardness_errors() {
    assert!(hardness_rho(&[1.0, 1.0, 0.0], 2).is_err());
    // Top gap tied with the next one.
    assert!(hardness_rho(&[0.0, 1.0, 2.0], 2).is_err());
    assert!(hardness_rho(&[0.0, 1.0], 3).is_err());
}

#[test]
fn bound_monotonicity() {
    let rho = [0.1f64, 0.2, 0.3];
    let base = sample_bound_from_rho(&rho, 0.1);
    assert!(sample_bound_from_rho(&[0.11, 0.2, 0.3], 0.1) < base);
    assert!(sample_bound_from_rho(&rho, 0.01) > base);
    let d1 = sample_bound_from_rho(&rho, 1e-4) - sample_bound_from_rho(&rho, 1e-2);
    let d2 = sample_bound_from_rho(&rho, 1e-6) - sample_bound_from_rho(&rho, 1e-4);
    assert!((d1 - d2).abs() < 1e-6 * d1);
}

#[test]
fn rejects_multidimensional_arms() {
    assert!(matches!(BocElim::<f64>::new(3, 2, PolicyConfig::new(0.1, 2)), Err(ClusterError::UnsupportedDimension { .. })));
}

#[test]
fn first_round_samples_every_arm_once() {
    let mut policy = BocElim::new(7, 1, PolicyConfig::new(0.1, 3)).unwrap();
    for m in 0..7 {
        let Action::Pull(arm) = policy.next_action().unwrap() else { panic!() };
        assert_eq!(arm, m);
        policy.observe(arm, &[DATASET2[arm]]).unwrap();
    }
    assert_eq!(policy.state().counts(), &[1; 7]);
    // Intervals of width ~6 overlap everything: nothing can be selected.
    assert!(policy.state().right().iter().chain(policy.state().left()).all(|&s| s != Side::Selected));
}

#[test]
fn zero_variance_declares_truth() {
    let truth = ClusterAssignment::from_one_based(&[1, 1, 1, 2, 2, 3, 3]).unwrap();
    let mut policy = BocElim::new(7, 1, PolicyConfig::new(0.1, 3)).unwrap();
    let r = run_policy(&mut policy, 1, Some(&truth), |arm, out| out[0] = DATASET2[arm]).unwrap();
    assert_eq!(r.correct, Some(true));
    assert!(!r.capped);
    assert_eq!(r.stopping_time, policy.state().counts().iter().sum::<u64>());
}

#[test]
fn step_cap_flags_result() {
    let mut config = PolicyConfig::new(0.1, 3);
    config.step_cap = 50;
    let mut policy = BocElim::new(7, 1, config).unwrap();
    let r = run_policy(&mut policy, 1, None, |arm, out| out[0] = DATASET2[arm]).unwrap();
    assert!(r.capped);
    assert!(r.stopping_time >= 50 && r.stopping_time < 57);
}

/// Samples whose running mean never leaves `[mu - c_n, mu + c_n]`.
fn good_event_sampler(means: Vec<f64>, delta: f64, seed: u64) -> impl FnMut(usize, &mut [f64]) {
    let m = means.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; m];
    let mut sums = vec![0.0; m];
    move |arm, out| {
        counts[arm] += 1;
        let n = counts[arm] as f64;
        let c: f64 = confidence_param(counts[arm], delta, m).unwrap();
        let x = means[arm] + rng.sample::<f64, _>(StandardNormal);
        let x = x.clamp(n * (means[arm] - c) - sums[arm], n * (means[arm] + c) - sums[arm]);
        sums[arm] += x;
        out[0] = x;
    }
}

fn separated_instance() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (3usize..7, any::<u64>()).prop_map(|(m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..m);
        // Top gaps at least 1.5 times the others.
        let mut gaps: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(0.3..1.0)).collect();
        let mut idx: Vec<usize> = (0..m - 1).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        for &i in &idx[..k - 1] {
            gaps[i] = rng.gen_range(1.6..2.5);
        }
        let mut means = vec![0.0];
        for g in gaps {
            means.push(means.last().unwrap() + g);
        }
        for i in (1..m).rev() {
            means.swap(i, rng.gen_range(0..=i));
        }
        (means, k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn good_event_always_correct((means, k) in separated_instance(), seed in any::<u64>()) {
        let mm = crate::means::MeanMatrix::from_scalars(&means).unwrap();
        let truth = crate::cluster::slink_cluster(&mm, k).unwrap();
        let mut policy = BocElim::new(means.len(), 1, PolicyConfig::new(0.1, k)).unwrap();
        let r = run_policy(&mut policy, 1, Some(&truth), good_event_sampler(means.clone(), 0.1, seed)).unwrap();
        prop_assert!(!r.capped);
        prop_assert_eq!(r.correct, Some(true));
        let bound = predicted_sample_bound(&means, k, 0.1).unwrap();
        prop_assert!((r.stopping_time as f64) <= bound);
    }

    #[test]
    fn side_sets_partition_and_only_shrink(seed in any::<u64>()) {
        let mut policy = BocElim::new(7, 1, PolicyConfig::new(0.1, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prev: Option<(Vec<Side>, Vec<Side>)> = None;
        let mut samples_by_rounds = 0u64;
        let mut active = policy.state().active().len() as u64;
        let mut rounds = 0;
        loop {
            match policy.next_action().unwrap() {
                Action::Pull(arm) => {
                    let x = DATASET2[arm] + rng.sample::<f64, _>(StandardNormal);
                    policy.observe(arm, &[x]).unwrap();
                    let s = policy.state();
                    if s.rounds() > rounds {
                        rounds = s.rounds();
                        samples_by_rounds += active;
                        active = s.active().len() as u64;
                        if let Some((r0, l0)) = &prev {
                            for a in 0..7 {
                                prop_assert!(r0[a] == Side::Active || r0[a] == s.right()[a]);
                                prop_assert!(l0[a] == Side::Active || l0[a] == s.left()[a]);
                            }
                        }
                        prev = Some((s.right().to_vec(), s.left().to_vec()));
                    }
                }
                Action::Stop(r) => {
                    prop_assert_eq!(r.stopping_time, samples_by_rounds);
                    break;
                }
            }
        }
    }

    #[test]
    fn gap_upper_bounds_cover_true_gaps(
        (means, k) in separated_instance(),
        noise in prop::collection::vec(-1.0f64..1.0, 7),
        c in 0.01f64..0.5,
    ) {
        let m = means.len();
        let hat: Vec<f64> = (0..m).map(|a| means[a] + c * noise[a]).collect();
        let lo: Vec<f64> = hat.iter().map(|x| x - c).collect();
        let hi: Vec<f64> = hat.iter().map(|x| x + c).collect();
        let order = rank_arms(&means);
        for p in 0..m - 1 {
            let gap = means[order[p]] - means[order[p + 1]];
            prop_assert!(gap <= max_right_gap(&lo, &hi, order[p + 1]) + 1e-12);
            prop_assert!(gap <= max_left_gap(&lo, &hi, order[p]) + 1e-12);
        }
        let mut gaps: Vec<f64> = (0..m - 1).map(|p| means[order[p]] - means[order[p + 1]]).collect();
        gaps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let ledger = GapLedger::compute(&hat, &lo, &hi, k).unwrap();
        prop_assert!(ledger.lower_top >= gaps[k - 2] - 4.0 * c - 1e-12);
        prop_assert!(ledger.upper_next <= ledger.upper_top);
        prop_assert!(ledger.lower_next <= ledger.lower_top);
        prop_assert!(ledger.min_right.iter().chain(&ledger.min_left).all(|&x| x >= 0.0));
    }

    #[test]
    fn hardness_scales_linearly((means, k) in separated_instance(), s in 0.1f64..10.0) {
        let rho = hardness_rho(&means, k).unwrap();
        let scaled: Vec<f64> = means.iter().map(|x| x * s).collect();
        let rho_s = hardness_rho(&scaled, k).unwrap();
        for (a, b) in rho.iter().zip(&rho_s) {
            prop_assert!(a.is_finite() && *a > 0.0);
            prop_assert!((a * s - b).abs() < 1e-9 * b.max(1.0));
        }
    }
}
