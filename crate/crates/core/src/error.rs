//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by prediction, training, and file-format code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("block at ({x0},{y0}) with size {n} does not fit a {width}x{height} image")]
    BlockOutOfBounds {
        x0: usize,
        y0: usize,
        n: usize,
        width: usize,
        height: usize,
    },

    #[error("prediction mode {0} is outside 0..=34")]
    InvalidMode(u8),

    #[error("mode {0} is not angular (expected 2..=34)")]
    NotAngular(u8),

    #[error("block size {0} is not one of 4, 8, 16, 32")]
    InvalidBlockSize(usize),

    #[error("bit depth {0} is not 8 or 10")]
    InvalidBitDepth(u8),

    #[error("sample value {value} exceeds the {bit_depth}-bit range")]
    SampleOutOfRange { value: u16, bit_depth: u8 },

    #[error("reference vector has length {got}, expected {expected}")]
    BadReferenceLength { got: usize, expected: usize },

    #[error("binomial filter order {0} must be even and within 2..=8")]
    InvalidKernelOrder(u32),

    #[error("blend weight {0} is outside [0, 1]")]
    InvalidBlendWeight(f64),

    #[error("matrix realization requires exact (real-valued) rounding; integer rounding is not linear")]
    NonlinearRounding,

    #[error("statistics are empty (count = 0)")]
    EmptyStats,

    #[error("statistics shape mismatch: cannot combine (N={n_a}, mode={mode_a}) with (N={n_b}, mode={mode_b})")]
    StatsMismatch {
        n_a: usize,
        mode_a: u8,
        n_b: usize,
        mode_b: u8,
    },

    #[error("normal matrix is not positive definite after regularization (estimated condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("number of parameter sets {0} must be 2 or 4")]
    InvalidSetCount(usize),

    #[error("mode groups do not partition 0..=34: {0}")]
    BadModeGroups(String),

    #[error("no parameters for (N={n}, group={group}, set={set})")]
    MissingParams { n: usize, group: usize, set: usize },

    #[error("coefficient {0} is not a multiple of 1/32 and cannot be serialized exactly")]
    NonLatticeCoefficient(f64),

    #[error("{path}: parse error at byte {offset}: {message}")]
    Parse {
        path: String,
        offset: usize,
        message: String,
    },

    #[error("{path}: expected {expected} bytes, found {actual}")]
    SizeMismatch {
        path: String,
        expected: usize,
        actual: usize,
    },

    #[error("unsupported format version {got} (expected {expected})")]
    UnsupportedVersion { got: u32, expected: u32 },

    #[error("matrices share no common block size or are empty")]
    MixedMatrixSizes,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid parameter file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
