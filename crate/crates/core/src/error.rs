use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis size for dimension {dimension} and order {order} overflows")]
    BasisOverflow { dimension: usize, order: usize },

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("fit tolerance {epsilon:e} is infeasible; the smallest attainable residual is {min_residual:e}")]
    InfeasibleEpsilon { epsilon: f64, min_residual: f64 },

    #[error("residual-ball projection did not converge within {iterations} iterations")]
    ProjectionNoConvergence { iterations: usize },

    #[error("rank collapse while orthonormalizing row {row}; re-randomize the initial guess")]
    RankCollapse { row: usize },

    #[error("Newton iteration failed at time step {step} (residual {residual:e})")]
    NewtonNoConvergence { step: usize, residual: f64 },

    #[error("every epsilon in the cross-validation grid is infeasible (floor {floor:e})")]
    AllGridInfeasible { floor: f64 },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("parameter `{name}` value {value} lies outside [{lower}, {upper}]")]
    OutOfRange {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unsupported file format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn open_file(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
