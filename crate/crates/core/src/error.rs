use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("first argument does not majorize the second")]
    NotMajorized,

    #[error("{0} is not full rank")]
    RankDeficient(&'static str),

    #[error("epsilon must lie in the open interval (0, 1), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("epsilon is required in {0} mode")]
    EpsilonRequired(&'static str),

    #[error("gamma must be positive, got {0}")]
    GammaOutOfRange(f64),

    #[error("channel does not split: off-block entry [{row}][{col}] = {value}")]
    Structure {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("splitting hypothesis violated: {0}")]
    SplitHypothesis(String),

    #[error("exact mode needs rational reference distributions; {0} is on the float backend")]
    IrrationalReference(&'static str),

    #[error("the two pairs have the same relative spectrum")]
    EqualRelativeSpectra,

    #[error("p is a permutation of p'")]
    PermutationEquivalent,

    #[error("conversion condition does not hold: {0}")]
    ConditionFalse(String),

    #[error("pipeline junction {index}: {detail}")]
    Junction { index: usize, detail: String },

    #[error("LP error: {0}")]
    Lp(#[from] crate::relmaj::lp::LpError),
}
