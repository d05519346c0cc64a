//! Seeded Monte-Carlo trials over (algorithm, delta, trial) cells.

use anyhow::Result;
use bandit_cluster_core::atboc::Atboc;
use bandit_cluster_core::elim::BocElim;
use bandit_cluster_core::lucbboc::Lucbboc;
use bandit_cluster_core::{run_policy, BanditPolicy, ClusterError, PolicyConfig, RunResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Algorithm, ExperimentConfig, Instance};

/// One line of `trials.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub delta: f64,
    pub delta_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub stopping_time: u64,
    pub correct: bool,
    pub capped: bool,
    /// One-based cluster labels.
    pub declared: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Wall-clock time of a trial; kept apart from the records so they stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub algorithm: Algorithm,
    pub delta_index: usize,
    pub trial: usize,
    pub wall_millis: f64,
}

/// Stream seed for a cell: the first 8 bytes of
/// `SHA-256(base_seed || algorithm || delta_index || trial)`.
pub fn trial_seed(base_seed: u64, algorithm: Algorithm, delta_index: usize, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(algorithm.name().as_bytes());
    h.update((delta_index as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn make_policy(algorithm: Algorithm, arms: usize, dim: usize, config: PolicyConfig) -> Result<Box<dyn BanditPolicy<f64>>, ClusterError> {
    Ok(match algorithm {
        Algorithm::Atboc => Box::new(Atboc::new(arms, dim, config)?),
        Algorithm::Lucbboc => Box::new(Lucbboc::new(arms, dim, config)?),
        Algorithm::BocElim => Box::new(BocElim::new(arms, dim, config)?),
    })
}

/// Runs one trial with its own random stream.
pub fn run_trial(instance: &Instance, algorithm: Algorithm, config: PolicyConfig, seed: u64) -> Result<RunResult<f64>, ClusterError> {
    let env = &instance.env;
    let mut policy = make_policy(algorithm, env.arms(), env.dim(), config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_policy(policy.as_mut(), env.dim(), Some(&instance.truth), |arm, out| env.sample(arm, &mut rng, out))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    algorithm: Algorithm,
    delta_index: usize,
    delta: f64,
    trial: usize,
}

fn execute(config: &ExperimentConfig, instance: &Instance, cell: Cell) -> (TrialRecord, TrialTiming) {
    let seed = trial_seed(config.base_seed, cell.algorithm, cell.delta_index, cell.trial);
    let start = std::time::Instant::now();
    let outcome = run_trial(instance, cell.algorithm, config.policy_config(cell.delta), seed);
    let wall_millis = start.elapsed().as_secs_f64() * 1e3;
    let base = TrialRecord {
        algorithm: cell.algorithm,
        delta: cell.delta,
        delta_index: cell.delta_index,
        trial: cell.trial,
        seed,
        stopping_time: 0,
        correct: false,
        capped: false,
        declared: Vec::new(),
        error: None,
    };
    let record = match outcome {
        Ok(r) => TrialRecord {
            stopping_time: r.stopping_time,
            correct: r.correct.unwrap_or(false),
            capped: r.capped,
            declared: r.declared.one_based(),
            ..base
        },
        Err(e) => {
            log::warn!("{} delta[{}] trial {}: {e}", cell.algorithm, cell.delta_index, cell.trial);
            TrialRecord { error: Some(e.to_string()), ..base }
        }
    };
    let timing = TrialTiming { algorithm: cell.algorithm, delta_index: cell.delta_index, trial: cell.trial, wall_millis };
    (record, timing)
}

/// All records and timings, sorted by (algorithm, delta index, trial).
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub timings: Vec<TrialTiming>,
}

/// Runs every cell on a pool of `jobs` threads (all cores if `None`).
///
/// Each cell draws from its own stream, so the records do not depend on `jobs`.
pub fn run_experiment(config: &ExperimentConfig, instance: &Instance, jobs: Option<usize>) -> Result<ExperimentOutput> {
    use rayon::prelude::*;
    config.validate()?;
    let deltas = config.deltas()?;
    let mut cells = Vec::new();
    for &algorithm in &config.algorithms {
        for (delta_index, &delta) in deltas.iter().enumerate() {
            for trial in 0..config.trials_per_cell {
                cells.push(Cell { algorithm, delta_index, delta, trial });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let mut results: Vec<(TrialRecord, TrialTiming)> = pool.install(|| cells.par_iter().map(|&c| execute(config, instance, c)).collect());
    results.sort_by(|a, b| (a.0.algorithm, a.0.delta_index, a.0.trial).cmp(&(b.0.algorithm, b.0.delta_index, b.0.trial)));
    let (records, timings) = results.into_iter().unzip();
    Ok(ExperimentOutput { records, timings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_across_cells() {
        let a = trial_seed(1, Algorithm::Atboc, 0, 0);
        assert_eq!(a, trial_seed(1, Algorithm::Atboc, 0, 0));
        assert_ne!(a, trial_seed(2, Algorithm::Atboc, 0, 0));
        assert_ne!(a, trial_seed(1, Algorithm::Lucbboc, 0, 0));
        assert_ne!(a, trial_seed(1, Algorithm::Atboc, 1, 0));
        assert_ne!(a, trial_seed(1, Algorithm::Atboc, 0, 1));
    }

    fn quick(extra: &str) -> ExperimentConfig {
        serde_json::from_str(&format!(r#"{{"k": 2, "algorithms": ["atboc"], "delta_grid": [0.1], "trials_per_cell": 2, {extra}}}"#)).unwrap()
    }

    #[test]
    fn capped_runs_are_flagged() {
        let config = quick(r#""means": [[0, 1, 5]], "step_cap": 2"#);
        let out = run_experiment(&config, &config.instance().unwrap(), Some(1)).unwrap();
        assert_eq!(out.records.len(), 2);
        assert!(out.records.iter().all(|r| r.capped && r.stopping_time == 2 && r.error.is_none()));
    }

    #[test]
    fn failures_are_recorded_not_raised() {
        // Two arms in two clusters: no alternative exists, so every trial fails.
        let config = quick(r#""means": [[0, 5]]"#);
        let out = run_experiment(&config, &config.instance().unwrap(), Some(1)).unwrap();
        assert_eq!(out.records.len(), 2);
        assert!(out.records.iter().all(|r| r.error.is_some() && !r.correct));
    }
}
