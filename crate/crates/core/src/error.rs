use std::path::PathBuf;

use crate::solver::SearchTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("cone projection is degenerate: input is parallel to the cone axis")]
    DegenerateDirection,
    #[error("random draw failed after {0} retries")]
    ImprobableFailure(usize),
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty set")]
    EmptySet,
    #[error("objective returned a non-finite value after {} evaluations", .0.evaluations)]
    NonFiniteObjective(Box<SearchTrace>),
    #[error("index {index} out of range for response dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("optimum response is not positive ({0})")]
    NonPositiveOptimum(f64),
    #[error("window {window} larger than image {height}x{width}")]
    WindowTooLarge {
        window: usize,
        height: usize,
        width: usize,
    },
    #[error("at least {required} items required, got {actual}")]
    TooFew { required: usize, actual: usize },
    #[error("degenerate task covariance")]
    DegenerateTask,
    #[error("degenerate pair split: {0}")]
    DegenerateSplit(String),
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{0} emitted stimuli violate their constraints")]
    ConstraintViolation(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroVector => "zero_vector",
            Error::NonFinite => "non_finite",
            Error::DegenerateDirection => "degenerate_direction",
            Error::ImprobableFailure(_) => "improbable_failure",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::EmptySet => "empty_set",
            Error::NonFiniteObjective(_) => "non_finite_objective",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::Asymmetric(_) => "asymmetric",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InvalidConfig(_) => "invalid_config",
            Error::ZeroVariance => "zero_variance",
            Error::RankDeficient => "rank_deficient",
            Error::NonPositiveOptimum(_) => "non_positive_optimum",
            Error::ConstraintViolation(_) => "constraint_violation",
            Error::WindowTooLarge { .. } => "window_too_large",
            Error::TooFew { .. } => "too_few",
            Error::DegenerateTask => "degenerate_task",
            Error::DegenerateSplit(_) => "degenerate_split",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
