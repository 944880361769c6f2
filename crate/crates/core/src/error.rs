use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("interval ({left}, {right}) has left >= right")]
    NonPositiveInterval { left: f64, right: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("ordering violated: expected a < b <= c < d, got ({a}, {b}, {c}, {d})")]
    Ordering { a: f64, b: f64, c: f64, d: f64 },

    #[error("sets overlap on a set of positive measure ({measure:e})")]
    Overlap { measure: f64 },

    #[error("requested {cells} cells exceeds the budget of {budget}")]
    Resolution { cells: usize, budget: usize },

    #[error("degenerate set: {0}")]
    DegenerateSet(String),

    #[error("tolerance not met: best estimate {best:e} with error {achieved:e}")]
    ToleranceNotMet { best: f64, achieved: f64 },

    #[error("point ({x}, {y}) is not on the boundary (signed distance {distance:e})")]
    NotOnBoundary { x: f64, y: f64, distance: f64 },

    #[error("principal value trace does not settle: final gap ratio {ratio}")]
    NoCancellation { ratio: f64 },

    #[error("estimated Hoelder exponent {alpha} of the gradient does not exceed s = {s}")]
    Regularity { alpha: f64, s: f64 },

    #[error("configuration has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("cell {0} is not a free cell")]
    CellNotFree(usize),

    #[error("{cells} free cells exceed the exhaustive-search limit of {max}")]
    TooLarge { cells: usize, max: usize },

    #[error("no boundary cell admits a ball of the requested radius inside the frame")]
    NoInteriorBalls,

    #[error("trace is unbounded or not finite")]
    UnboundedTrace,

    #[error("region of radius {radius} is not covered by the sampled domain")]
    RegionOutOfDomain { radius: f64 },

    #[error("origin is not on the boundary of the set")]
    OriginNotOnBoundary,

    #[error("samples are too rough for a second-difference evaluation (indicator {0:e})")]
    Roughness(f64),

    #[error("window boundary carries {ratio:e} of the peak amplitude; periodic wrap-around is not negligible")]
    AliasWarning { ratio: f64 },

    #[error("boundary is empty")]
    EmptyBoundary,

    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    #[error("classification does not change across the s list")]
    Inconclusive,

    #[error("grids live on different lattices")]
    LatticeMismatch,

    #[error("kernel matrix needs {bytes} bytes, above the {budget} byte budget")]
    MemoryBudget { bytes: usize, budget: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
