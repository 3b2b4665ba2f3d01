use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("arity mismatch: multiplier has arity {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("frequency tuple does not lie on the hyperplane: sum = {sum:e}")]
    OffHyperplane { sum: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("under-resolved set: {0}")]
    Resolution(String),

    #[error("degenerate fit: {0}")]
    Fit(String),

    #[error("evolution aborted at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("time {0} is not covered by the trajectory samples")]
    OutsideTrajectory(f64),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
