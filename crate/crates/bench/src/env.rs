//! Arm environments.

use bandit_cluster_core::MeanMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Source of per-arm samples.
#[derive(Debug, Clone)]
pub enum Environment {
    /// Identity-covariance Gaussian around each mean.
    Gaussian(MeanMatrix<f64>),
    /// Uniform draws with replacement from a fixed pool per arm (one-dimensional).
    Empirical { pools: Vec<Vec<f64>>, means: MeanMatrix<f64> },
    /// Always returns the mean.
    Constant(MeanMatrix<f64>),
}

impl Environment {
    pub fn empirical(pools: Vec<Vec<f64>>) -> Self {
        let means: Vec<f64> = pools.iter().map(|p| p.iter().sum::<f64>() / p.len() as f64).collect();
        let means = MeanMatrix::from_scalars(&means).expect("non-empty finite pools");
        Self::Empirical { pools, means }
    }

    pub fn means(&self) -> &MeanMatrix<f64> {
        match self {
            Self::Gaussian(m) | Self::Constant(m) => m,
            Self::Empirical { means, .. } => means,
        }
    }

    pub fn arms(&self) -> usize {
        self.means().arms()
    }

    pub fn dim(&self) -> usize {
        self.means().dim()
    }

    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Gaussian(m) => {
                for (o, &mu) in out.iter_mut().zip(m.arm(arm)) {
                    *o = mu + rng.sample::<f64, _>(StandardNormal);
                }
            }
            Self::Constant(m) => out.copy_from_slice(m.arm(arm)),
            Self::Empirical { pools, .. } => {
                let pool = &pools[arm];
                out[0] = pool[rng.gen_range(0..pool.len())];
            }
        }
    }
}
