use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid annulus: {0}")]
    InvalidAnnulus(String),

    #[error("invalid target radius R = {0} (need R >= 1)")]
    InvalidTarget(f64),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("problem is below the bound; the radial harmonic map is not admissible")]
    BelowBound,

    #[error("problem satisfies the bound; no squeezing map is needed")]
    AboveBound,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sampling failed at node ({row}, {col}): {reason}")]
    Sampling {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("map is not admissible: {0}")]
    NonAdmissible(String),

    #[error("winding number is ill-conditioned on row {row} (|w| = {modulus:.3e})")]
    IllConditionedWinding { row: usize, modulus: f64 },

    #[error("linear solve failed: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed map data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
