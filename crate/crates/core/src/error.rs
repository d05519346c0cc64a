use thiserror::Error;

/// Errors raised by the clustering, solver and bandit routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("need 1 <= K <= M, got K={k} with M={m} arms")]
    InvalidClusterCount { k: usize, m: usize },

    #[error("mean matrix is empty or has zero dimension")]
    EmptyInstance,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("weights must be non-negative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("label vector must use every cluster in 0..{k} exactly as a surjection")]
    InvalidLabels { k: usize },

    /// No clustering other than the true one exists (every cluster is a singleton).
    #[error("the alternative set is empty: no cluster can be split")]
    EmptyAlternative,

    #[error("brute-force oracle limited to {limit} arms, got {m}")]
    OracleTooLarge { m: usize, limit: usize },

    #[error("{count} partitions satisfy intra < inter; expected exactly one")]
    NotUniquelySeparated { count: usize },

    #[error("grid oracle limited to M*d <= {limit}, got {got}")]
    GridTooLarge { got: usize, limit: usize },

    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("{algorithm} requires d = 1, got d = {d}")]
    UnsupportedDimension { algorithm: &'static str, d: usize },

    #[error("arm index {arm} out of range for {m} arms")]
    ArmOutOfRange { arm: usize, m: usize },

    #[error("observation for arm {got} but {expected:?} was requested")]
    UnexpectedObservation { expected: Option<usize>, got: usize },

    #[error("hardness is undefined: {0}")]
    UndefinedHardness(&'static str),

    #[error("the policy has already stopped")]
    PolicyFinished,

    #[error("linear program failed: {0}")]
    LinearProgram(String),
}
