use thiserror::Error;

/// Errors produced across the simulation pipeline.
#[derive(Debug, Error)]
pub enum CoxError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("environment variant incompatible with dimension {dim}: {variant}")]
    IncompatibleDimension { variant: String, dim: usize },

    #[error("margin {margin} too small for environment influence range; need at least {required}")]
    MarginTooSmall { margin: f64, required: f64 },

    #[error("no stabilization field defined for variant {0}")]
    NoField(String),

    #[error("query ball exits the padded window")]
    BallOutsideWindow,

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("infinite d-th radius moment implies complete coverage; vacant probability is zero")]
    InfiniteMoment,

    #[error("no supercritical phase detected at this scale (lambda cap {0} reached)")]
    NoBracket(f64),

    #[error("lambda {lambda} is supercritical (threshold {threshold}); pass the override to proceed")]
    Supercritical { lambda: f64, threshold: f64 },

    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
