use thiserror::Error;

pub type Result<T, E = FateError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FateError {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is indefinite beyond jitter: smallest eigenvalue {min_eigenvalue:e} < -{jitter:e}")]
    IndefiniteBeyondJitter { min_eigenvalue: f64, jitter: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix has collapsed column rank ({rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("empty input")]
    EmptyInput,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u32, classes: usize },
    #[error("no sample has label {0}")]
    EmptyClass(u32),
    #[error("requested {requested} output dimensions but the basis has usable rank {rank}")]
    RankTooHigh { requested: usize, rank: usize },
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    DivergenceDetected { epoch: usize, loss: f64, trace: Vec<f64> },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("curve has no points")]
    EmptyCurve,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("cannot parse row {row}, column `{column}`: {message}")]
    Parse { row: usize, column: String, message: String },
    #[error("file has no data rows")]
    EmptyFile,
    #[error("column is constant and cannot be discretized")]
    DegenerateColumn,
    #[error("bad synthetic spec: {0}")]
    BadSpec(String),
    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl FateError {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            FateError::NotSymmetric(_) => "NotSymmetric",
            FateError::IndefiniteBeyondJitter { .. } => "IndefiniteBeyondJitter",
            FateError::NotPositiveDefinite => "NotPositiveDefinite",
            FateError::NoConvergence(_) => "NoConvergence",
            FateError::ShapeMismatch(_) => "ShapeMismatch",
            FateError::RankDeficient { .. } => "RankDeficient",
            FateError::BadConfig(_) => "BadConfig",
            FateError::EmptyInput => "EmptyInput",
            FateError::LabelOutOfRange { .. } => "LabelOutOfRange",
            FateError::EmptyClass(_) => "EmptyClass",
            FateError::RankTooHigh { .. } => "RankTooHigh",
            FateError::DimensionMismatch { .. } => "DimensionMismatch",
            FateError::DegenerateBatch(_) => "DegenerateBatch",
            FateError::DivergenceDetected { .. } => "DivergenceDetected",
            FateError::SingleClass => "SingleClass",
            FateError::EmptyGroup(_) => "EmptyGroup",
            FateError::EmptyCurve => "EmptyCurve",
            FateError::MissingColumn(_) => "MissingColumn",
            FateError::Parse { .. } => "ParseError",
            FateError::EmptyFile => "EmptyFile",
            FateError::DegenerateColumn => "DegenerateColumn",
            FateError::BadSpec(_) => "BadSpec",
            FateError::RowCountMismatch { .. } => "RowCountMismatch",
            FateError::Schema(_) => "SchemaError",
            FateError::Io(_) => "IoError",
            FateError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(_) => "IoError",
                _ => "ParseError",
            },
        }
    }
}
