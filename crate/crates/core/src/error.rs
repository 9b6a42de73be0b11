use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra signature: {0}")]
    InvalidSignature(String),
    #[error("signature mismatch: {left:?} vs {right:?}")]
    SignatureMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("malformed input: {0}")]
    Shape(String),
    #[error("block {block} is not invertible (smallest singular value {sigma:e})")]
    NotInvertible { block: usize, sigma: f64 },
    #[error("invalid point label {0:?}")]
    InvalidLabel(String),
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("vectors or operators belong to different module spaces")]
    SpaceMismatch,
    #[error("targets are not in the range of the Gram matrix (residual {residual:e})")]
    NotInRange { residual: f64 },
    #[error("function is not a multiplier: worst point {point:?}, residual {residual:e}")]
    NotAMultiplier { point: String, residual: f64 },
    #[error("operator does not respect null coefficient vectors (residual {residual:e})")]
    InconsistentOperator { residual: f64 },
    #[error("family is not a frame (lower bound {lower:e})")]
    NotAFrame { lower: f64 },
    #[error("frame bounds undefined on a zero-dimensional module")]
    EmptyRealization,
    #[error("prescribed values admit no extension to the module (residual {residual:e})")]
    NoExtension { residual: f64 },
    #[error("value at point {point:?} is not central")]
    NonCentral { point: String },
    #[error("kernel diagonal at point {point:?} is not invertible")]
    DiagonalNotInvertible { point: String },
    #[error("subset is not a set of uniqueness")]
    NotSetOfUniqueness,
    #[error("kernel is not positive definite")]
    NotPositiveDefinite,
    #[error("feature index {0} out of range")]
    UnknownFeature(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
