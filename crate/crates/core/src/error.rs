use thiserror::Error;

/// Errors raised by the decomposition pipeline and its kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite entry (NaN or Inf) in input matrix")]
    NonFiniteInput,

    #[error("least-squares operator is rank deficient: rank {rank} < {cols} columns")]
    RankDeficientL { rank: usize, cols: usize },

    #[error("cannot evaluate a series with a pole at its own expansion point")]
    EvalAtPole,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expansion points differ: {0} vs {1}")]
    PointMismatch(num_complex::Complex64, num_complex::Complex64),

    #[error("monomial scaling would need a negative power at nonzero entry ({row}, {col})")]
    NegativeShiftOnNonzeroEntry { row: usize, col: usize },

    #[error("the matrix function is identically zero")]
    ZeroFunction,

    #[error("series is only known through order {available}, order {required} is needed")]
    InsufficientSeriesOrder { required: i64, available: i64 },

    #[error("the normal rank of a truncated series cannot be estimated; give it explicitly")]
    NormalRankRequired,

    #[error("rank search did not reach normal rank {normal_rank} within order {max_order} (surplus rank stuck at {reached})")]
    MaxOrderExceeded {
        max_order: usize,
        normal_rank: usize,
        reached: usize,
    },

    #[error("frozen block lost rank at step {step}: expected {expected}, found {found}")]
    RankDecrease {
        step: usize,
        expected: usize,
        found: usize,
    },

    #[error("surplus rank {found} exceeds the normal rank {normal_rank} at step {step}")]
    RankExceedsNormalRank {
        step: usize,
        found: usize,
        normal_rank: usize,
    },

    #[error("Toeplitz profile is incomplete: surplus rank never reached the normal rank")]
    IncompleteProfile,

    #[error("no structural index is positive, so there are no root vectors at this point")]
    NoZeroAtPoint,

    #[error("random draw was degenerate {attempts} times in a row")]
    DegenerateDraw { attempts: usize },

    #[error("invalid instance specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
