use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration has {got} entries, model expects {expected}")]
    InvalidConfiguration { expected: usize, got: usize },
    #[error("invalid robot model: {0}")]
    InvalidModel(&'static str),
    #[error("rotation matrix is not orthonormal (deviation {deviation:e})")]
    InvalidRotation { deviation: f64 },
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("face pair ({0}, {0}) is not a pair")]
    InvalidPair(usize),
    #[error("face spanned by torques {i} and {j} is degenerate")]
    DegenerateFace { i: usize, j: usize },
    #[error("spline parameter {t} outside [0, {duration}]")]
    OutOfDomain { t: f64, duration: f64 },
    #[error("invalid spline shape: {0}")]
    InvalidSpline(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("guidance start cell violates clearance")]
    StartBlocked,
    #[error("guidance goal cell violates clearance")]
    GoalBlocked,
    #[error("no guidance path between start and goal")]
    NoPath,
    #[error("no feasible candidate to select from")]
    EmptyFeasibleSet,
    #[error("{which} endpoint is infeasible")]
    InfeasibleEndpoint { which: &'static str },
    #[error("anchor generation failed at iteration {iteration}")]
    AnchorGenerationFailed { iteration: usize },
    #[error("segment solver diverged (non-finite objective)")]
    SolverDiverged,
    #[error("quadratic subproblem infeasible")]
    QpInfeasible,
    #[error("segment {index} solver diverged")]
    SegmentDiverged { index: usize },
    #[error("segment {index} has an empty feasible set for its linear constraints")]
    SegmentInfeasible { index: usize },
}
