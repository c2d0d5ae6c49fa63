use std::path::PathBuf;

/// Errors raised by the toolkit. Variants name the violated precondition.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("non-positive input: {count} node(s) <= 0 (min {min:e})")]
    NonPositiveInput { count: usize, min: f64 },
    #[error("kernel integral diverges at rho = 0 for alpha = {alpha} <= n = {n}")]
    DivergentKernel { n: usize, alpha: f64 },
    #[error("adaptive quadrature exceeded its budget of {budget} intervals (error estimate {estimate:e})")]
    QuadratureFailure { budget: usize, estimate: f64 },
    #[error("truncation dominates: {0}")]
    TruncationDominant(String),
    #[error("sphere of radius {radius} escapes the box (max admissible {max_radius})")]
    SphereEscapesBox { radius: f64, max_radius: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("degenerate scaling: pq = 1")]
    DegenerateScaling,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid order: 2k = {} must be < n = {n}", 2 * .k)]
    InvalidOrder { n: usize, k: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("super polyharmonic positivity has not been established for this fixture")]
    PositivityMissing,
    #[error("all fields vanish identically; the constant c is undefined")]
    DegenerateZero,
    #[error("forcing spectrum vanishes on every retained mode")]
    SpectrumDegenerate,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
