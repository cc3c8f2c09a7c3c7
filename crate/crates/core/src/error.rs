use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
///
/// Divergent Muckenhoupt or reverse Hölder constants are not errors; they are
/// reported through an infinite value plus a refinement trend.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("type exponent estimation failed: {0}")]
    Estimation(String),
    #[error("singular Gram system on annulus {annulus}")]
    SingularGram { annulus: usize },
    #[error("test function {index} violates the S_m bound (max weighted derivative {value})")]
    Dictionary { index: usize, value: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
