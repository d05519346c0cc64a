//! Oracle suites: fast routes checked against brute-force ones.

use bandit_cluster_core::cluster::brute_force_slink_oracle;
use bandit_cluster_core::psi::{grid_oracle_psi, PsiEvaluator, SimplexWeights, SolverConfig};
use bandit_cluster_core::{slink_cluster, MeanMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest discrepancy seen, in the suite's own unit.
    pub worst: f64,
    pub limit: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} cases, {} failures, worst {:.3e} (limit {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.limit
        )
    }
}

/// Means with a unique separated `k`-partition, checked by the brute-force oracle.
pub fn random_separated_instance(rng: &mut ChaCha8Rng, m: usize, d: usize, k: usize) -> MeanMatrix<f64> {
    loop {
        let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
        let mut labels: Vec<usize> = (0..m).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
        labels.shuffle(rng);
        let spread = rng.gen_range(0.1..1.0);
        let arms: Vec<Vec<f64>> = labels
            .iter()
            .map(|&c| centers[c].iter().map(|&x| x + spread * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let means = MeanMatrix::from_arms(&arms).expect("finite arms");
        if brute_force_slink_oracle(&means, k).is_ok() {
            return means;
        }
    }
}

/// Single linkage against exhaustive partition search, `M <= 7`, `d <= 2`.
pub fn slink_oracle_suite(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let m = rng.gen_range(3..=7);
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(2..m);
        let means = random_separated_instance(&mut rng, m, d, k);
        let fast = slink_cluster(&means, k).expect("valid k");
        let slow = brute_force_slink_oracle(&means, k).expect("separated by construction");
        if !fast.equivalent(&slow).unwrap_or(false) {
            failures += 1;
        }
    }
    SuiteReport { name: "slink-vs-partition-oracle", cases, failures, worst: failures as f64, limit: 0.0 }
}

/// One-dimensional instance with `m` arms whose top `k - 1` gaps clearly dominate.
fn gapped_line(rng: &mut ChaCha8Rng, m: usize, k: usize) -> MeanMatrix<f64> {
    let mut gaps: Vec<f64> = (0..m - 1).map(|i| if i < k - 1 { rng.gen_range(3.5..5.0) } else { rng.gen_range(1.0..2.8) }).collect();
    gaps.shuffle(rng);
    let mut x = vec![rng.gen_range(-1.0..1.0)];
    for g in gaps {
        x.push(x.last().unwrap() + g);
    }
    x.shuffle(rng);
    MeanMatrix::from_scalars(&x).expect("finite")
}

fn random_weights(rng: &mut ChaCha8Rng, m: usize, floor: f64) -> SimplexWeights<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(floor..1.0)).collect();
    SimplexWeights::normalized(&raw).expect("positive weights")
}

/// `psi` against the grid oracle on one-dimensional instances with `M <= 4`.
///
/// The grid value is an upper bound; a case fails if `psi` exceeds it or if the
/// relative gap `(grid - psi) / grid` exceeds `tolerance`.
pub fn psi_grid_suite(cases: usize, step: f64, tolerance: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = rng.gen_range(3..=4);
        let k = rng.gen_range(2..m);
        let means = gapped_line(&mut rng, m, k);
        let w = random_weights(&mut rng, m, 0.2);
        let ev = PsiEvaluator::new(&means, k, &SolverConfig::default()).expect("alternative exists");
        let fast = ev.evaluate(w.as_slice()).value;
        let grid = grid_oracle_psi(&w, &means, k, step).expect("grid fits");
        let rel = (grid - fast) / grid;
        worst = worst.max(rel.abs());
        if fast > grid * (1.0 + 1e-12) || rel > tolerance {
            failures += 1;
        }
    }
    SuiteReport { name: "psi-vs-grid-oracle", cases, failures, worst, limit: tolerance }
}

/// Instances used by the benchmark configs, with their `K`.
pub fn benchmark_instances() -> Vec<(&'static str, MeanMatrix<f64>, usize)> {
    let line = |x: &[f64]| MeanMatrix::from_scalars(x).expect("finite");
    vec![
        ("dataset1", MeanMatrix::from_rows(&[vec![-1.0, -1.0, 3.0, 4.0], vec![-1.0, -2.0, 3.0, 4.0]]).expect("finite"), 2),
        ("dataset2", line(&[0.0, 0.5, 1.0, 2.5, 3.0, 4.5, 5.0]), 3),
        ("dataset3", line(&[0.0, 0.5, 1.0, 2.5, 3.0, 3.5, 4.0]), 2),
    ]
}

/// Concavity of `w -> psi(w, mu)` along `probes` random chords per instance.
///
/// Runs on the benchmark instances followed by `extra` random separated instances
/// (`M <= 6` on the line, `M <= 4` in the plane). A probe's violation is
/// `(chord - psi(mid)) / max psi`.
pub fn concavity_suite(extra: usize, probes: usize, tolerance: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances: Vec<(MeanMatrix<f64>, usize)> = benchmark_instances().into_iter().map(|(_, m, k)| (m, k)).collect();
    for i in 0..extra {
        let (d, m) = if i % 3 == 2 { (2, rng.gen_range(3..=4)) } else { (1, rng.gen_range(3..=6)) };
        let k = rng.gen_range(2..m);
        instances.push((random_separated_instance(&mut rng, m, d, k), k));
    }
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (means, k) in &instances {
        let m = means.arms();
        let ev = PsiEvaluator::new(means, *k, &SolverConfig::default()).expect("alternative exists");
        for _ in 0..probes {
            let w1 = random_weights(&mut rng, m, 0.0);
            let w2 = random_weights(&mut rng, m, 0.0);
            let a = rng.gen_range(0.0..1.0);
            let mid: Vec<f64> = w1.as_slice().iter().zip(w2.as_slice()).map(|(x, y)| a * x + (1.0 - a) * y).collect();
            let (p1, p2) = (ev.evaluate(w1.as_slice()).value, ev.evaluate(w2.as_slice()).value);
            let chord = a * p1 + (1.0 - a) * p2;
            let violation = (chord - ev.evaluate(&mid).value) / p1.max(p2).max(f64::MIN_POSITIVE);
            worst = worst.max(violation);
            if violation > tolerance {
                failures += 1;
            }
        }
    }
    SuiteReport { name: "psi-concavity", cases: instances.len() * probes, failures, worst, limit: tolerance }
}

/// The suites run by `bandit-cluster validate`.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![slink_oracle_suite(200, seed), psi_grid_suite(20, 0.025, 5e-2, seed), concavity_suite(12, 100, 1e-6, seed)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_are_separated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let means = random_separated_instance(&mut rng, 6, 2, 3);
            assert!(brute_force_slink_oracle(&means, 3).is_ok());
        }
    }

    #[test]
    fn small_suites_pass() {
        assert!(slink_oracle_suite(20, 9).passed());
        assert!(concavity_suite(2, 10, 1e-6, 9).passed());
        let grid = psi_grid_suite(2, 0.05, 0.1, 9);
        assert!(grid.passed(), "{}", grid.line());
    }

    #[test]
    fn report_line_flags_failures() {
        let r = SuiteReport { name: "x", cases: 3, failures: 1, worst: 0.2, limit: 0.1 };
        assert!(!r.passed());
        assert!(r.line().starts_with("FAIL x"));
        assert!(!SuiteReport { failures: 0, cases: 0, ..r }.passed());
    }
}
