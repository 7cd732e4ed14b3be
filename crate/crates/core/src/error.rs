use thiserror::Error;

/// Errors raised by domain oracles, estimators and probes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point is not interior to the domain")]
    NotInterior,
    #[error("direction vector is zero")]
    ZeroVector,
    #[error("point is a registered singular boundary point")]
    SingularBoundaryPoint,
    #[error("no normal reach found at any probe scale")]
    ReachNotFound,
    #[error("family carries no scaling group")]
    NonHomogeneousFamily,
    #[error("projective map hit its pole")]
    PoleHit,
    #[error("base point is not on the boundary (|r| = {residual:e})")]
    BasePointNotOnBoundary { residual: f64 },
    #[error("only {found} interior samples, need at least {needed}")]
    InsufficientInteriorSamples { found: usize, needed: usize },
    #[error("estimator requires a C-convex domain")]
    NotCConvex,
    #[error("curve node {index} lies outside the domain")]
    NodeOutsideDomain { index: usize },
    #[error("segment leaves the domain")]
    SegmentExitsDomain,
    #[error("points fall outside the rasterization window")]
    PointsOutsideWindow,
    #[error("closed form only available for disk, ball, polydisc and half-plane models")]
    ModelOnly,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("boundary points do not lie in a common boundary flat")]
    NotInFlat,
    #[error("chord through the points is degenerate")]
    DegenerateChord,
    #[error("sample cloud is empty")]
    EmptySampleCloud,
    #[error("test pair is not interior to every domain in the sequence")]
    PairExitsDomain,
    #[error("boundary points must be distinct")]
    IdenticalBoundaryPoints,
    #[error("report needs at least two scales")]
    TooFewScales,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
