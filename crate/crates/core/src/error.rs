use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: only D in 1..=3 is supported")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid voxel set: {0}")]
    VoxelSet(String),

    #[error("invalid field: {0}")]
    Field(String),

    #[error("unknown domain preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error("added resolution must be odd (or 0 for the lattice itself), got {0}")]
    EvenResolution(u32),

    #[error("degenerate normalization at {location:?}: ||K_x|| = {value:e}")]
    DegenerateNormalization { location: Vec<f64>, value: f64 },

    #[error("degenerate statistic at {location:?}: zero sample variance")]
    DegenerateStatistic { location: Vec<f64> },

    #[error("degenerate metric at {location:?}")]
    DegenerateMetric { location: Vec<f64> },

    #[error("singular metric")]
    SingularMetric,

    #[error("unsupported EC density order d = {0}")]
    UnsupportedOrder(usize),

    #[error("threshold search failed: {0}")]
    Threshold(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
