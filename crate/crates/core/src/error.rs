//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by series construction, diagnostics, and model fitting.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("timestamp {0} does not align to the step grid")]
    NonGridTimestamp(String),

    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),

    #[error("gap at {0} under `error` gap policy")]
    Gap(String),

    #[error("series too short: need {needed}, have {actual}")]
    SeriesTooShort { needed: usize, actual: usize },

    #[error("split boundary outside series range: {0}")]
    BoundaryOutOfRange(String),

    #[error("zero-variance series: {0}")]
    ZeroVariance(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular regression matrix in {0}")]
    SingularMatrix(String),

    #[error("non-stationary or non-invertible coefficients: {0}")]
    NonStationary(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("no model candidate converged")]
    NoCandidateConverged,

    #[error("invalid model document: {0}")]
    InvalidModelDocument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
