use thiserror::Error;

use crate::flow::DriftSeries;
use crate::hierarchy::HierarchyResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid size {0}: must be a power of two and at least 16")]
    InvalidGrid(usize),

    #[error("function is not in the image of D: mean {mean:e} exceeds tolerance {tol:e}")]
    NotZeroMean { mean: f64, tol: f64 },

    #[error("operator symbol vanishes at wavenumber n = {wavenumber}")]
    SingularSymbol { wavenumber: i64 },

    #[error("inversion requires a constant affine part m0")]
    NonConstantAffinePart,

    #[error("Lenard ladder broke at level {level}: X_{level} has mean {mean:e}")]
    LadderBreak {
        level: usize,
        mean: f64,
        partial: Box<HierarchyResult>,
    },

    #[error("index {index} out of range (valid: {min}..={max})")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64, partial: Box<DriftSeries> },

    #[error("no closed form available for level {0}")]
    UnsupportedLevel(usize),

    #[error("cochain is not a cocycle: residual {residual:e}")]
    NotACocycle { residual: f64 },

    #[error("cochain has no skew-symmetric part")]
    DegenerateCochain,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
