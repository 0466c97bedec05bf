use thiserror::Error;

/// Errors raised by the factorization library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),

    #[error("modulus {0} does not fit in a residue byte")]
    ModulusTooLarge(u32),

    #[error("entry {value} out of range for p={modulus}")]
    EntryOutOfRange { value: u32, modulus: u32 },

    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("algebra mismatch: {left} vs {right}")]
    AlgebraMismatch { left: String, right: String },

    #[error("rank over GF(p) is not defined for Boolean matrices")]
    BooleanRank,

    #[error("Boolean algebra requires p = 2")]
    BooleanModulus,

    #[error("exponent q={q} overflows the distance table for p={modulus}")]
    ExponentTooLarge { q: u32, modulus: u32 },

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("{p}^{r} centers exceed the supported limit of {limit}; use the block-partitioned factorizer")]
    TooManyCenters { p: u32, r: usize, limit: usize },

    #[error("invalid relation: {0}")]
    InvalidRelation(String),

    #[error("arity mismatch: expected {expected}, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("center set is empty")]
    EmptyCenters,

    #[error("center set violates the relation at row {row}")]
    RelationViolation { row: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle budget exceeded: {required} candidates, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
