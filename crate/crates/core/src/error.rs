use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point does not belong to space {space}: {reason}")]
    SpaceMismatch { space: String, reason: String },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("result left the SPD cone (min eigenvalue {min_eigenvalue:e})")]
    SingularResult { min_eigenvalue: f64 },

    #[error("target lies on the cut locus of the base point")]
    CutLocus,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("Fréchet mean is not unique (objective gap {gap:e} between distinct minimizers)")]
    NonUniqueMean { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sweep cell n={n} delta={delta} failed: {errors} of {datasets} datasets errored")]
    CellFailed {
        n: usize,
        delta: f64,
        errors: usize,
        datasets: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
