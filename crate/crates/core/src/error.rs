use thiserror::Error;

/// Errors produced by the sampling, update and initialization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("rank {rank} out of range for {len} values")]
    RankOutOfRange { rank: usize, len: usize },

    #[error("no sign change of the function on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "degenerate update at iteration {iteration}: no pilot sample carries positive payoff mass"
    )]
    DegenerateUpdate { iteration: usize },

    #[error("rarity parameter did not reach 1 within {stages} stages (last delta {last_delta:?})")]
    StagnantRarity { stages: usize, last_delta: Vec<f64> },

    #[error("model `{0}` has no approximation initializer")]
    ApproxUnavailable(String),

    #[error("model `{0}` has no rarity embedding")]
    EmbeddingUnavailable(String),

    #[error("sample sizes differ: {0} vs {1}")]
    UnequalSampleSize(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
