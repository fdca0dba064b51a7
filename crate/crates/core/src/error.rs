use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("grid mismatch: fields live on different grids ({0})")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected} samples per component, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hermitian symmetry violated: max relative defect {defect:.3e} exceeds {tol:.1e}")]
    HermitianViolation { defect: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested shells up to |m| = {requested} exceed the dealiased truncation |m| <= {max}")]
    ShellsExceedTruncation { requested: usize, max: usize },

    #[error("observer inconsistent with grid: {0}")]
    ObserverMismatch(String),

    #[error("zero field where a nonzero field is required: {0}")]
    ZeroField(String),

    #[error("NaN detected at t = {t} (step {step})")]
    NanDetected { t: f64, step: usize },

    #[error("synchronization error at numerical floor; no decay rate to fit")]
    FloorReached,

    #[error("too few samples in window: need at least {need}, found {found}")]
    TooFewSamples { need: usize, found: usize },

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    ConfigValidation(Vec<String>),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
