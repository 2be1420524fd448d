use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graphs or streams live in different relation spaces")]
    SpaceMismatch,

    #[error("operation requires an unweighted graph (weights in {{0, 1}}, inert relations zero)")]
    Weighted,

    #[error("time {t} is outside the window [{start}, {end})")]
    TimeOutOfWindow { t: i64, start: i64, end: i64 },

    #[error("relation index {index} out of range for {len} relations")]
    RelationOutOfRange { index: usize, len: usize },

    #[error("{what} must be a power of two, got {value}")]
    NotPowerOfTwo { what: &'static str, value: usize },

    #[error("coordinates ({x}, {y}) out of range 1..={n}")]
    CoordinateOutOfRange { x: usize, y: usize, n: usize },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("invalid partition tree: {0}")]
    InvalidTree(String),

    #[error("resolution level {level} exceeds the maximum {max}")]
    InvalidLevel { level: u32, max: u32 },

    #[error("invalid relation space: {0}")]
    InvalidSpace(String),

    #[error("coefficient selection is empty")]
    EmptySelection,

    #[error("complex residue {residue:e} exceeds tolerance; the frequency response is not conjugate-symmetric")]
    ComplexResidue { residue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{trials} trials is too few (need at least {min})")]
    TooFewTrials { trials: usize, min: usize },

    #[error("BFS could not collect {needed} edges from the fragment")]
    BfsExhausted { needed: usize },
}
