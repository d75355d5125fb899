use thiserror::Error;

/// Failures of the linear solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("breakdown detected in iteration {iteration}")]
    BreakdownDetected { iteration: usize },
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },
    #[error("matrix is singular")]
    SingularMatrix,
}

/// Errors raised while reading or validating a run configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value `{value}` for `{key}`: expected {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: String,
    },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing data function for {0}")]
    MissingData(&'static str),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("slab {slab} (t = {t_end}) failed: {source}")]
    SlabFailed {
        slab: usize,
        t_end: f64,
        source: SolverError,
    },
    #[error("level {level}: {source}")]
    LevelFailed { level: usize, source: Box<Error> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Whether the failure originates in a linear solve.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Solver(_) | Error::SlabFailed { .. } => true,
            Error::LevelFailed { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
