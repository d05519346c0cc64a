use proptest::prelude::*;

use super::*;
use crate::cluster::AltSpec;

fn line(v: &[f64]) -> MeanMatrix<f64> {
    MeanMatrix::from_scalars(v).unwrap()
}

fn dataset1() -> MeanMatrix<f64> {
    MeanMatrix::from_rows(&[vec![-1.0, -1.0, 3.0, 4.0], vec![-1.0, -2.0, 3.0, 4.0]]).unwrap()
}

fn per_spec() -> SolverConfig {
    SolverConfig { method: PsiMethod::PerSpec, ..SolverConfig::default() }
}

fn augmented_only() -> SolverConfig {
    SolverConfig { method: PsiMethod::AugmentedLagrangian, ..SolverConfig::default() }
}

fn simplex(raw: &[f64]) -> SimplexWeights<f64> {
    SimplexWeights::normalized(raw).unwrap()
}

#[test]
fn weights_validation() {
    assert!(SimplexWeights::new(vec![0.5, 0.5]).is_ok());
    assert!(SimplexWeights::new(vec![0.6, 0.5]).is_err());
    assert!(SimplexWeights::new(vec![-0.1, 1.1]).is_err());
    assert_eq!(SimplexWeights::new(vec![0.0, 1.0]).unwrap().support(), vec![1]);
}

#[test]
fn two_arms_two_clusters_has_no_alternative() {
    let r = psi(&SimplexWeights::uniform(2), &line(&[0.0, 1.0]), 2);
    assert!(matches!(r, Err(ClusterError::EmptyAlternative)));
    assert!(matches!(t_star(&line(&[0.0, 1.0]), 2), Err(ClusterError::EmptyAlternative)));
    assert_eq!(lower_bound(0.1, &line(&[0.0, 1.0]), 2).unwrap(), 0.0);
}

// mu = [0, 0, 1], split {0}|{1}, pair (1, 2): the cheapest alternative puts arm 1 at
// the midpoint of arms 0 and 2. Projecting (0, 0, 1) on x0 - 2 x1 + x2 = 0 moves it
// by squared distance 1/6; with weights 1/3 the cost is 1/36. The other orientation
// (x0 = x2) costs 1/12, and the spec with pair (0, 2) is the mirror image.
const ZERO_ZERO_ONE: f64 = 1.0 / 36.0;

#[test]
fn qcqp_hand_value_all_solvers() {
    let mu = line(&[0.0, 0.0, 1.0]);
    let w = SimplexWeights::uniform(3);
    let spec = AltSpec::new(0, vec![0], vec![1], 1, 2);
    for cfg in [SolverConfig::default(), augmented_only()] {
        let sol = solve_alt_qcqp(&QcqpProblem { spec: &spec, weights: &w, anchor_means: &mu }, &cfg);
        assert!(sol.converged);
        assert!((sol.value - ZERO_ZERO_ONE).abs() < 1e-7, "{cfg:?}: {}", sol.value);
    }
    for cfg in [SolverConfig::default(), per_spec(), augmented_only()] {
        let r = psi_with(&w, &mu, 2, &cfg).unwrap();
        assert!((r.value - ZERO_ZERO_ONE).abs() < 1e-7, "{cfg:?}: {}", r.value);
    }
}

#[test]
fn zero_weight_on_unconstrained_arm_gives_zero() {
    // Weight only on arm 3, which no spec of c = [1,1,2,3] ... touches in its split.
    let mu = line(&[0.0, 0.1, 5.0, 10.0]);
    let spec = AltSpec::new(0, vec![0], vec![1], 1, 2);
    let w = SimplexWeights::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    for cfg in [SolverConfig::default(), augmented_only()] {
        let sol = solve_alt_qcqp(&QcqpProblem { spec: &spec, weights: &w, anchor_means: &mu }, &cfg);
        assert!(sol.value < 1e-12, "{}", sol.value);
    }
}

#[test]
fn psi_matches_grid_at_its_resolution() {
    // The grid value is an upper bound exceeding psi by at most about
    // step * sum_m w_m |lambda*_m - mu_m| (plus a second-order term).
    let mu = line(&[0.0, 0.0, 1.0]);
    let w = SimplexWeights::uniform(3);
    let r = psi(&w, &mu, 2).unwrap();
    for step in [0.02, 0.01, 0.005] {
        let g = grid_oracle_psi(&w, &mu, 2, step).unwrap();
        let shift: f64 = (0..3).map(|m| w.as_slice()[m] * (2.0 * r.arm_costs[m]).sqrt()).sum();
        assert!(g >= r.value - 1e-12);
        assert!(g - r.value <= step * shift + step * step, "step {step}: grid {g} psi {}", r.value);
    }
}

#[test]
fn grid_oracle_examples() {
    let w = SimplexWeights::uniform(2);
    assert!(matches!(grid_oracle_psi(&w, &line(&[0.0, 1.0]), 2, 0.05), Err(ClusterError::EmptyAlternative)));
    let mu = line(&[0.0, 0.6, 1.0]);
    let w = SimplexWeights::uniform(3);
    let coarse = grid_oracle_psi(&w, &mu, 2, 0.1).unwrap();
    let mid = grid_oracle_psi(&w, &mu, 2, 0.05).unwrap();
    let fine = grid_oracle_psi(&w, &mu, 2, 0.025).unwrap();
    assert!(fine > 0.0);
    assert!(coarse >= mid && mid >= fine);
    assert!(matches!(
        grid_oracle_psi(&SimplexWeights::uniform(5), &line(&[0.0, 1.0, 2.0, 3.0, 4.0]), 2, 0.1),
        Err(ClusterError::GridTooLarge { .. })
    ));
}

#[test]
fn psi_is_monotone_in_unnormalized_weights() {
    let mu = line(&[0.0, 0.6, 1.0]);
    let ev = PsiEvaluator::new(&mu, 2, &SolverConfig::default()).unwrap();
    let base = [0.2, 0.3, 0.5];
    let v0 = ev.evaluate(&base).value;
    for arm in 0..3 {
        let mut heavier = base;
        heavier[arm] *= 2.0;
        assert!(ev.evaluate(&heavier).value >= v0 - 1e-12);
    }
}

#[test]
fn dataset1_single_pair_solver_agrees_with_augmented_lagrangian() {
    let mu = dataset1();
    for raw in [[1.0, 1.0, 1.0, 1.0], [0.1, 0.4, 0.3, 0.2], [0.7, 0.1, 0.1, 0.1]] {
        let w = simplex(&raw);
        let exact = psi(&w, &mu, 2).unwrap();
        let al = psi_with(&w, &mu, 2, &augmented_only()).unwrap();
        assert!(exact.value > 0.0);
        assert!((exact.value - al.value).abs() <= 1e-6 * exact.value, "{} vs {}", exact.value, al.value);
    }
}

#[test]
fn minimizer_lies_on_the_alternative_boundary() {
    let mu = line(&[0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0]);
    let w = simplex(&[0.1, 0.2, 0.1, 0.15, 0.15, 0.1, 0.2]);
    let r = psi(&w, &mu, 3).unwrap();
    let c = crate::cluster::slink_cluster(&r.minimizer, 3).unwrap();
    let truth = crate::cluster::slink_cluster(&mu, 3).unwrap();
    let intra = crate::cluster::intra_distance(&r.minimizer, &truth).unwrap();
    let inter = crate::cluster::inter_distance(&r.minimizer, &truth).unwrap();
    // On the boundary the truth is at best weakly separated.
    assert!(intra >= inter - 1e-9 || !c.equivalent(&truth).unwrap());
    assert!((r.minimizer.weighted_half_sq_dist(&mu, w.as_slice()) - r.value).abs() < 1e-12);
}

#[test]
fn symmetric_instance_has_symmetric_optimal_weights() {
    let mu = line(&[0.0, 0.2, 2.0, 2.2]);
    let t = t_star(&mu, 2).unwrap();
    let w = t.w_star.as_slice();
    assert!((w[0] - w[3]).abs() < 1e-3 && (w[1] - w[2]).abs() < 1e-3, "{w:?}");
    assert!(t.relative_gap <= 1e-6);
}

#[test]
fn t_star_beats_dense_simplex_search() {
    let mu = line(&[0.0, 0.0, 1.0]);
    let t = t_star(&mu, 2).unwrap();
    let ev = PsiEvaluator::new(&mu, 2, &SolverConfig::default()).unwrap();
    let mut best: f64 = 0.0;
    for i in 0..=50 {
        for j in 0..=(50 - i) {
            let w = [i as f64 / 50.0, j as f64 / 50.0, (50 - i - j) as f64 / 50.0];
            best = best.max(ev.evaluate(&w).value);
        }
    }
    let found = 1.0 / t.t_star;
    assert!(found >= best * (1.0 - 1e-6));
    assert!((found - best) / found < 0.05);
    // The grid oracle at w* agrees within its resolution.
    let g = grid_oracle_psi(&t.w_star, &mu, 2, 0.005).unwrap();
    assert!(g >= found - 1e-9 && (g - found) / found < 0.05, "grid {g} vs {found}");
}

#[test]
fn dataset1_lower_bound_at_e_minus_6() {
    let lb = lower_bound((-6.0f64).exp(), &dataset1(), 2).unwrap();
    assert!((12.0..=20.0).contains(&lb), "lower bound {lb}");
}

#[test]
fn kl_examples() {
    assert_eq!(kl_bernoulli(0.5f64, 0.5).unwrap(), 0.0);
    let expect = 0.1 * (1.0f64 / 9.0).ln() + 0.9 * 9.0f64.ln();
    assert!((kl_bernoulli(0.1, 0.9).unwrap() - expect).abs() < 1e-15);
    assert!((kl_bernoulli(0.1f64, 0.9).unwrap() - 1.757_779_3).abs() < 1e-6);
    assert!(kl_bernoulli(0.0, 0.5).is_err());
    assert!(kl_bernoulli(0.5, 1.0).is_err());
    let tiny = 1e-12f64;
    assert!((kl_bernoulli(tiny, 1.0 - tiny).unwrap() / (1.0 / tiny).ln() - 1.0).abs() < 0.01);
    assert_eq!(lower_bound(0.5, &dataset1(), 2).unwrap(), 0.0);
}

#[test]
fn f32_path_agrees_with_f64() {
    let mu64 = line(&[0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0]);
    let mu32: MeanMatrix<f32> = mu64.cast();
    let a = psi(&SimplexWeights::uniform(7), &mu64, 3).unwrap().value;
    let b = psi(&SimplexWeights::<f32>::uniform(7), &mu32, 3).unwrap().value;
    assert!(((a as f32) - b).abs() <= 1e-4 * b);
}

fn separated_line(m: usize) -> impl Strategy<Value = Vec<f64>> {
    // Arms in two or three well separated groups.
    proptest::collection::vec((0usize..3, -0.4f64..0.4), m).prop_map(|v| v.into_iter().map(|(g, x)| 3.0 * g as f64 + x).collect())
}

fn spread2(mu: &MeanMatrix<f64>) -> f64 {
    let (lo, hi) = mu.value_range();
    (hi - lo) * (hi - lo)
}

fn weights(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.02f64..1.0, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn line_cones_match_per_spec_solvers(mu in separated_line(5), w in weights(5), k in 2usize..4) {
        let mu = line(&mu);
        let w = simplex(&w);
        let fast = psi(&w, &mu, k);
        let slow = psi_with(&w, &mu, k, &per_spec());
        match (fast, slow) {
            // Absolute floor: both solvers resolve psi to ~1e-15 of the squared spread.
            (Ok(a), Ok(b)) => prop_assert!(
                (a.value - b.value).abs() <= 1e-6 * b.value + 1e-12 * spread2(&mu),
                "{} vs {}",
                a.value,
                b.value
            ),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn single_pair_exact_solver_matches_augmented_lagrangian(
        raw in proptest::collection::vec(-2.0f64..2.0, 8),
        w in weights(4),
    ) {
        let mu = MeanMatrix::from_arms(&raw.chunks(2).map(<[f64]>::to_vec).collect::<Vec<_>>()).unwrap();
        let w = simplex(&w);
        let spec = AltSpec::new(0, vec![0], vec![1], 2, 3);
        let p = QcqpProblem { spec: &spec, weights: &w, anchor_means: &mu };
        let exact = solve_alt_qcqp(&p, &SolverConfig::default());
        let al = solve_alt_qcqp(&p, &augmented_only());
        // The exact solver is a global minimum; the local solver may only match or exceed it.
        prop_assert!(exact.value <= al.value + 1e-7 * (1.0 + al.value));
        prop_assert!((exact.value - al.value).abs() <= 1e-5 * (1e-3 + exact.value), "{} vs {}", exact.value, al.value);
    }

    #[test]
    fn concave_in_weights(mu in separated_line(5), w1 in weights(5), w2 in weights(5), alpha in 0.01f64..0.99) {
        let mu = line(&mu);
        let ev = match PsiEvaluator::new(&mu, 2, &SolverConfig::default()) { Ok(e) => e, Err(_) => return Ok(()) };
        let (w1, w2) = (simplex(&w1), simplex(&w2));
        let mix: Vec<f64> = w1.as_slice().iter().zip(w2.as_slice()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let (p1, p2, pm) = (ev.evaluate(w1.as_slice()).value, ev.evaluate(w2.as_slice()).value, ev.evaluate(&mix).value);
        prop_assert!(pm >= alpha * p1 + (1.0 - alpha) * p2 - 1e-6 * p1.max(p2));
    }

    #[test]
    fn quadratic_scaling(mu in separated_line(5), w in weights(5)) {
        let mu = line(&mu);
        let w = simplex(&w);
        let Ok(base) = psi(&w, &mu, 2) else { return Ok(()) };
        for c in [0.5, 2.0, 4.0] {
            let scaled = psi(&w, &mu.scaled(c), 2).unwrap();
            prop_assert!((scaled.value - c * c * base.value).abs() <= 1e-6 * scaled.value.max(1e-300));
        }
    }

    #[test]
    fn psi_never_negative(mu in separated_line(4), w in proptest::collection::vec(0.0f64..1.0, 4)) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        if let Ok(r) = psi(&simplex(&w), &line(&mu), 2) {
            prop_assert!(r.value >= 0.0);
        }
    }
}

#[test]
fn t_star_dominates_random_allocations() {
    use rand::{Rng, SeedableRng};
    let mu = line(&[0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0]);
    let t = t_star(&mu, 3).unwrap();
    let best = 1.0 / t.t_star;
    let ev = PsiEvaluator::new(&mu, 3, &SolverConfig::default()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let raw: Vec<f64> = (0..7).map(|_| -rng.gen::<f64>().ln()).collect();
        let w = simplex(&raw);
        assert!(ev.evaluate(w.as_slice()).value <= best * (1.0 + 1e-6));
    }
}

