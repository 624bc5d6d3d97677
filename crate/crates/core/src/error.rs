use thiserror::Error;

/// Errors surfaced by the planning toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cloud has {got} points but the operation needs more than {needed}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("degenerate correspondences: matched pairs have rank-deficient covariance")]
    DegenerateCorrespondences,
    #[error("unknown shape category `{0}`")]
    UnknownCategory(String),
    #[error("shape parameter {index} = {value} outside [{min}, {max}]")]
    ParamOutOfRange { index: usize, value: f64, min: f64, max: f64 },
    #[error("mesh does not fit the workspace bounds")]
    DoesNotFit,
    #[error("no ray from the camera hits the object")]
    NoVisiblePoints,
    #[error("sampling region is empty")]
    EmptyRegion,
    #[error("no grasp candidates found after {trials} trials")]
    NoCandidates { trials: usize },
    #[error("part {part} has too few surface points ({got}) to sample grasps")]
    PartTooSmall { part: u32, got: usize },
    #[error("unknown lexicon id `{0}`")]
    UnknownId(String),
    #[error("cannot resolve a part from the given slots")]
    Unresolvable,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mask lengths differ: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("catalog cannot satisfy the split constraints: {0}")]
    InfeasibleSplit(String),
    #[error("missing model: {0}")]
    MissingModel(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("ply parse error: {0}")]
    PlyParse(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
