//! Online clustering of Gaussian bandit arms under a fixed confidence level.
//!
//! Arms with unknown mean vectors form `K` clusters defined by single linkage on the
//! true means. The crate provides the characteristic time `T*` and the
//! alternative-set infimum `psi`, and three sequential policies:
//!
//! * [`atboc::Atboc`] tracks the plug-in optimal allocation and stops with a GLR test;
//! * [`lucbboc::Lucbboc`] replaces tracking with gap confidence bounds;
//! * [`elim::BocElim`] eliminates gap slots for one-dimensional arms.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the aliases below
//! fix the scalar type.

pub mod atboc;
pub mod bandit;
pub mod cluster;
pub mod elim;
pub mod error;
pub mod glr;
pub mod linalg;
pub mod lucbboc;
pub mod means;
pub mod psi;
pub mod scalar;

pub use bandit::{run_policy, Action, BanditPolicy, RunResult};
pub use cluster::{slink_cluster, AltSpec, ClusterAssignment};
pub use error::ClusterError;
pub use glr::PolicyConfig;
pub use means::MeanMatrix;
pub use scalar::Real;

pub type MeanMatrix64 = MeanMatrix<f64>;
pub type MeanMatrix32 = MeanMatrix<f32>;
pub type Atboc64 = atboc::Atboc<f64>;
pub type Atboc32 = atboc::Atboc<f32>;
pub type Lucbboc64 = lucbboc::Lucbboc<f64>;
pub type Lucbboc32 = lucbboc::Lucbboc<f32>;
pub type BocElim64 = elim::BocElim<f64>;
pub type BocElim32 = elim::BocElim<f32>;
pub type RunResult64 = RunResult<f64>;
pub type TStar64 = psi::TStar<f64>;
pub type TStar32 = psi::TStar<f32>;
