use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("flow escaped: |x| = {norm:e} exceeded the bound at t = {t}")]
    FlowEscaped { t: f64, norm: f64 },
    #[error("flow integration did not finish within {0} steps")]
    FlowStepLimit(usize),
    #[error("bracket blowup: more than {0} bracket words")]
    BracketBlowup(usize),
    #[error("Hörmander condition fails at the base point")]
    HormanderFails,
    #[error("class of [B{i},B{j}] is not in the span of the weight-{weight} fiber basis (jet order too small?)")]
    ProjectionResidual { i: usize, j: usize, weight: u32 },
    #[error("free algebra too large: dimension {dim} exceeds the cap {cap}")]
    FreeAlgebraTooLarge { dim: usize, cap: usize },
    #[error("truncation too large: matrix dimension {dim} exceeds {cap}")]
    TruncationTooLarge { dim: usize, cap: usize },
    #[error("outside dom(k): Newton residual {residual:e} after {steps} steps")]
    OutsideDomain { residual: f64, steps: usize },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
