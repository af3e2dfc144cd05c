use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not special unitary: det = {re} + {im}i")]
    NotSpecialUnitary { re: f64, im: f64 },

    #[error("matrix is not unitary (max |UU* - I| = {0:e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("invalid visibility {0}: |V| must lie in (0, 1]")]
    InvalidVisibility(f64),

    #[error("unsupported degree {0}")]
    UnsupportedDegree(u32),

    #[error("unsupported design order t = {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(u32),

    #[error("polynomial expansion left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),

    #[error("loss calibration impossible: {0}")]
    CalibrationImpossible(String),

    #[error("empty count record")]
    EmptyCounts,

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("table error: {0}")]
    Table(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
