use thiserror::Error;

/// Errors shared by the geometry, quadtree, ordering and index modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("axis index {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("empty point set")]
    EmptyPointSet,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("duplicate point")]
    DuplicatePoint,
    #[error("point not present in index")]
    PointNotFound,
    #[error("points not separable above the depth floor (level {0})")]
    DepthFloorReached(i32),
    #[error("coordinate outside the fixed-point representable range: {0}")]
    Unrepresentable(f64),
    #[error("coincident points")]
    CoincidentPoints,
    #[error("pair distance {dist} exceeds the family scale delta = {delta}")]
    PairBeyondDelta { dist: f64, delta: f64 },
    #[error("value outside the oracle's supported coordinate range")]
    OracleDomain,
    #[error("count overflow: {0}")]
    CountOverflow(String),
}
