use std::path::PathBuf;

use thiserror::Error;

use crate::data::QuarterIndex;

/// Errors raised anywhere in the fitting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwapError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("parse error at row {row}: {reason}")]
    ParseError { row: usize, reason: String },
    #[error("duplicate quarter {0}")]
    DuplicateQuarter(QuarterIndex),
    #[error("non-finite value at row {0}")]
    NonFiniteValue(usize),
    #[error("series have no quarters in common")]
    EmptyIntersection,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveFactor(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("inverse undefined at y = {0}")]
    InverseDomain(f64),
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("fitted model is not monotone increasing over the data range")]
    NonMonotoneFit,
    #[error("beta-loss search ran into the trust-region boundary")]
    TrustRegionExhausted,
    #[error("sample must be non-empty and strictly positive")]
    NonPositiveSample,
    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("all probabilities fall on one side of 0.5")]
    AllOneSided,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("singular design matrix")]
    SingularDesign,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("rejection sampling exhausted at point {0}")]
    RangeExhausted(usize),
    #[error("instance too large for enumeration: n = {0} (max 12)")]
    TooLarge(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SwapError>;
