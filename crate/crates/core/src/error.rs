use thiserror::Error;

/// Errors produced by the polar/PAC design toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} is out of range for n = {n} (N = {})", 1usize << n)]
    IndexOutOfRange { index: usize, n: u32 },

    #[error("n = {0} layers is not supported (maximum is {max})", max = crate::indexsets::MAX_LAYERS)]
    UnsupportedLayers(u32),

    #[error("index {0} appears more than once in the information set")]
    DuplicateIndex(usize),

    #[error("information set violates the partial order property: {index} is in I but {successor} is frozen")]
    PartialOrderViolation { index: usize, successor: usize },

    #[error("information set is empty")]
    EmptyProfile,

    #[error("row {index} is not in K_{leader}")]
    NotInKSet { leader: usize, index: usize },

    #[error("support {support:#b} is not a subset of S_{leader}")]
    NotSubsetOfLeader { leader: usize, support: u32 },

    #[error("row {index} has weight {weight} but the minimum row weight of the code is {w_min}")]
    NotMinWeightLeader {
        index: usize,
        weight: u64,
        w_min: u64,
    },

    #[error("rows {rows:?} are required but frozen")]
    FrozenRowsRequired { rows: Vec<usize> },

    #[error("enumeration budget of {budget} evaluations exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("dimension {k} exceeds the exhaustive-sweep limit of {max}")]
    DimensionTooLarge { k: usize, max: usize },

    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid precoder: {0}")]
    InvalidPrecoder(String),

    #[error("invalid CRC polynomial: {0}")]
    InvalidCrc(String),

    #[error("codeword count overflows 64 bits")]
    CountOverflow,

    #[error("no codeword of weight {w_min} exists; the minimum distance is larger than the minimum row weight")]
    MinDistanceAboveRowWeight { w_min: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
