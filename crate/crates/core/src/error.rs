use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("zero pivot in row {row} (|pivot| = {pivot:e})")]
    ZeroPivot { row: usize, pivot: f64 },

    #[error("linear solve residual {residual:e} exceeds {bound:e}")]
    SolveAccuracy { residual: f64, bound: f64 },

    #[error("singular border: Schur complement {0:e}")]
    SingularBorder(f64),

    #[error("Newton did not converge at time level {level} after {iterations} iterations (last update norm {last_update:e})")]
    NewtonDivergence {
        level: usize,
        iterations: usize,
        last_update: f64,
    },

    #[error("constraint l(U) = d violated at time level {level}: gap {gap:e}")]
    ConstraintGap { level: usize, gap: f64 },

    #[error("time level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown example id {0}")]
    UnknownExample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Usage errors (bad configuration) as opposed to solver failures.
    pub fn is_usage(&self) -> bool {
        matches!(self, Self::InvalidArgument(_) | Self::UnknownExample(_))
    }
}
