//! Experiment configuration (JSON).

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use bandit_cluster_core::psi::{PsiMethod, SolverConfig};
use bandit_cluster_core::{slink_cluster, ClusterAssignment, MeanMatrix, PolicyConfig};
use serde::{Deserialize, Serialize};

use crate::dataset::{ingest_ratings_csv, DatasetSpec, Ingested};
use crate::env::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Atboc,
    Lucbboc,
    BocElim,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Atboc, Algorithm::Lucbboc, Algorithm::BocElim];

    pub fn name(self) -> &'static str {
        match self {
            Self::Atboc => "atboc",
            Self::Lucbboc => "lucbboc",
            Self::BocElim => "boc_elim",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sample noise around inline means.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    #[default]
    Gaussian,
    /// Zero variance; every sample equals the mean.
    Constant,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiSolver {
    #[default]
    Auto,
    PerSpec,
    AugmentedLagrangian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub psi_solver: PsiSolver,
    pub initial_budget: usize,
    pub warm_budget: usize,
    pub exact_resolve: bool,
    pub multistarts: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { psi_solver: PsiSolver::Auto, initial_budget: 100, warm_budget: 25, exact_resolve: false, multistarts: 8 }
    }
}

fn default_step_cap() -> u64 {
    10_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Row-major `d x M` means; exclusive with `dataset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSpec>,
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    /// Confidence levels; exclusive with `log_inv_delta_grid`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_grid: Vec<f64>,
    /// Values of `log(1/delta)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_inv_delta_grid: Vec<f64>,
    pub trials_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A resolved problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub env: Environment,
    pub truth: ClusterAssignment,
    /// Set for dataset instances.
    pub dataset: Option<Ingested>,
}

impl Instance {
    pub fn means(&self) -> &MeanMatrix<f64> {
        self.env.means()
    }
}

impl ExperimentConfig {
    /// Reads a config; a relative dataset path is resolved against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let (Some(ds), Some(dir)) = (config.dataset.as_mut(), path.parent()) {
            if ds.path.is_relative() {
                ds.path = dir.join(&ds.path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials_per_cell >= 1, "trials_per_cell must be at least 1");
        ensure!(!self.algorithms.is_empty(), "no algorithms selected");
        ensure!(self.step_cap >= 1, "step_cap must be positive");
        for d in self.deltas()? {
            ensure!(d > 0.0 && d < 1.0, "delta {d} outside (0, 1)");
        }
        Ok(())
    }

    pub fn deltas(&self) -> Result<Vec<f64>> {
        match (self.delta_grid.is_empty(), self.log_inv_delta_grid.is_empty()) {
            (false, true) => Ok(self.delta_grid.clone()),
            (true, false) => Ok(self.log_inv_delta_grid.iter().map(|x| (-x).exp()).collect()),
            (true, true) => bail!("one of delta_grid or log_inv_delta_grid is required"),
            (false, false) => bail!("delta_grid and log_inv_delta_grid are exclusive"),
        }
    }

    pub fn instance(&self) -> Result<Instance> {
        let (env, dataset) = match (&self.means, &self.dataset) {
            (Some(rows), None) => {
                let means = MeanMatrix::from_rows(rows).context("invalid means")?;
                let env = match self.noise {
                    Noise::Gaussian => Environment::Gaussian(means),
                    Noise::Constant => Environment::Constant(means),
                };
                (env, None)
            }
            (None, Some(ds)) => {
                let data = ingest_ratings_csv(&ds.path, &ds.arm_column, &ds.value_column, ds.scale_factor)
                    .with_context(|| format!("ingesting {}", ds.path.display()))?;
                (data.environment(), Some(data))
            }
            (Some(_), Some(_)) => bail!("means and dataset are exclusive"),
            (None, None) => bail!("one of means or dataset is required"),
        };
        let truth = slink_cluster(env.means(), self.k)?;
        for alg in &self.algorithms {
            ensure!(*alg != Algorithm::BocElim || env.dim() == 1, "boc_elim requires one-dimensional arms");
        }
        Ok(Instance { env, truth, dataset })
    }

    pub fn policy_config(&self, delta: f64) -> PolicyConfig {
        let mut p = PolicyConfig::new(delta, self.k);
        p.step_cap = self.step_cap;
        p.initial_budget = self.solver.initial_budget;
        p.warm_budget = self.solver.warm_budget;
        p.exact_resolve = self.solver.exact_resolve;
        p.solver = SolverConfig {
            method: match self.solver.psi_solver {
                PsiSolver::Auto => PsiMethod::Auto,
                PsiSolver::PerSpec => PsiMethod::PerSpec,
                PsiSolver::AugmentedLagrangian => PsiMethod::AugmentedLagrangian,
            },
            multistarts: self.solver.multistarts,
            ..SolverConfig::default()
        };
        p
    }
}
