use thiserror::Error;

/// Errors produced anywhere in the mixing laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {n} is not supported: {reason}")]
    UnsupportedGrid { n: usize, reason: &'static str },

    #[error("field mean {mean:e} exceeds tolerance relative to its L2 norm {l2:e}")]
    NonZeroMean { mean: f64, l2: f64 },

    #[error("Sobolev order {0} outside [-4, 4]")]
    SobolevOrder(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),

    #[error("time step {dt} violates the advective CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("invalid shift density: {0}")]
    InvalidDensity(String),

    #[error("grid n = {0} per dimension exceeds the 6D memory guard (n <= 16)")]
    MemoryGuard(usize),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
