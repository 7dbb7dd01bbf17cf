use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{t}, {end}]: the end must be strictly greater than the start")]
    InvalidInterval { t: f64, end: f64 },

    #[error("point {s} lies outside the interval [{t}, {end}]")]
    OutOfInterval { s: f64, t: f64, end: f64 },

    #[error("adaptive quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("{what} = {requested} exceeds the configured cap of {cap}")]
    ResourceCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("truncation order ({p1}, {p2}, {p3}) exceeds the tensor bounds ({b1}, {b2}, {b3})")]
    TruncationExceedsTensor {
        p1: usize,
        p2: usize,
        p3: usize,
        b1: usize,
        b2: usize,
        b3: usize,
    },

    #[error("coefficient table does not match the integral: {0}")]
    Mismatch(String),

    #[error("expansion not covered by a convergence result: {0}")]
    UnprovenCase(String),

    #[error("gaussian block has {available} columns per component, {required} required")]
    InsufficientBlock { required: usize, available: usize },

    #[error("p_max = {p_max} is too large for a grid of N = {n} steps (need p_max <= N/100)")]
    GridTooCoarse { p_max: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
