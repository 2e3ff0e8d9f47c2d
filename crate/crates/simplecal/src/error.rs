use thiserror::Error;

/// Errors surfaced by the calibration machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix contains NaN/Inf entries or has an unusable shape.
    #[error("invalid matrix `{name}`: {reason}")]
    InvalidMatrix { name: &'static str, reason: String },

    /// Matrix dimensions are mutually inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A simplification matrix does not have full column rank.
    #[error(
        "rank-deficient simplification: C is {rows}x{cols} with numeric rank {rank}; \
         full column rank is required"
    )]
    RankDeficientSimplification {
        rows: usize,
        cols: usize,
        rank: usize,
    },

    /// The innovation matrix `G Σ Gᵀ + Σεd` is singular to working tolerance.
    #[error("singular innovation matrix ({order}x{order}, numeric rank {rank})")]
    SingularInnovation { order: usize, rank: usize },

    /// The filtered data matrix `F G̃` is rank-deficient (duplicated or
    /// parameter-insensitive data rows must be combined or dropped), or a
    /// TSVD truncation index exceeds the available rank.
    #[error("filter rank error: {0}")]
    FilterRankError(String),

    /// A forward-model evaluation left the physical domain.
    #[error("physical domain error: {0}")]
    PhysicalDomainError(String),

    /// An iterative decomposition failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An MCMC run was too short to keep any post-burn-in samples.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// A covariance matrix is not symmetric positive semidefinite within
    /// tolerance.
    #[error("matrix `{name}` is not positive semidefinite: {reason}")]
    NotPsd { name: &'static str, reason: String },
}
