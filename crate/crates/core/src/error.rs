use thiserror::Error;

/// Errors raised by the solver and the diagnostic toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in field `{field}` at node {index}")]
    NonFinite { field: String, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("cylinder exceeds box: radius {radius} must be below half the box length {half_box}")]
    CylinderExceedsBox { radius: f64, half_box: f64 },

    #[error("time window [{start}, {end}] not covered by series spanning [{first}, {last}]")]
    TimeNotCovered {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CFL violation: dt = {dt} exceeds stable step {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("positivity violated: min {field} = {min} below -{tol}")]
    Positivity { field: String, min: f64, tol: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("test function does not vanish on the parabolic boundary: {0}")]
    SupportViolation(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
