//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while evaluating basis functions or building filter banks.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid order (n={n}, m={m}) for {family}: {reason}")]
    InvalidOrder {
        family: &'static str,
        n: u32,
        m: i32,
        reason: &'static str,
    },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("gamma pole at argument {arg} while evaluating {context}")]
    GammaPole { context: &'static str, arg: f64 },

    #[error("capacity exceeded: requested {requested} filters but only {available} valid orders exist for a {rows}x{cols} patch")]
    Capacity {
        requested: usize,
        available: usize,
        rows: usize,
        cols: usize,
    },

    #[error("shape mismatch: patch is {patch_rows}x{patch_cols}, bank expects {bank_rows}x{bank_cols}")]
    ShapeMismatch {
        patch_rows: usize,
        patch_cols: usize,
        bank_rows: usize,
        bank_cols: usize,
    },
}

/// Errors raised by the network forward pass.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {name}={value} {reason}")]
    Config {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("block geometry error: {name}={value} exceeds map extent {extent}")]
    Geometry {
        name: &'static str,
        value: usize,
        extent: usize,
    },

    #[error("map shape mismatch: expected {expected_rows}x{expected_cols}, got {got_rows}x{got_cols}")]
    MapShape {
        expected_rows: usize,
        expected_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("threshold search failed: achievable ones-fraction jumps from {above:.6} to {below:.6}, target [{target_lo:.3}, {target_hi:.3}]")]
    ThresholdSearch {
        above: f64,
        below: f64,
        target_lo: f64,
        target_hi: f64,
    },

    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Errors raised by the linear classifier head.
#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training requires at least two classes, got {0}")]
    SingleClass(usize),

    #[error("training requires at least one example")]
    EmptyTrainingSet,

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model file is corrupt: {0}")]
    CorruptModel(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised while loading, generating or splitting datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image header: {0}")]
    CorruptHeader(String),

    #[error("image dimensions overflow sanity bounds: {width}x{height}")]
    DimensionOverflow { width: u64, height: u64 },

    #[error("invalid generator counts: {0}")]
    InvalidCounts(String),

    #[error("class {class} has {count} images; at least 2 are required to split")]
    ClassTooSmall { class: usize, count: usize },

    #[error("invalid train fraction {0}; must lie strictly in (0,1)")]
    InvalidFraction(f64),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised during PCA filter learning.
#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least {need} patches to estimate a {need}-dimensional covariance, got {got}")]
    TooFewPatches { need: usize, got: usize },

    #[error("requested {requested} filters but patch dimension is {dim}")]
    TooManyFilters { requested: usize, dim: usize },

    #[error("covariance rank {rank} is below the requested {requested} filters")]
    RankDeficient { rank: usize, requested: usize },

    #[error("patch shape mismatch at index {index}")]
    PatchShape { index: usize },
}
