use thiserror::Error;

use crate::classify::ClassificationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector has no causal type")]
    ZeroVector,
    #[error("non-finite component in {0}")]
    NonFinite(&'static str),
    #[error("point is not on the upper hyperboloid sheet (residual {residual:e})")]
    OffHyperboloid { residual: f64 },
    #[error("matrix is not a proper orthochronous Lorentz isometry (residual {residual:e})")]
    NotLorentz { residual: f64 },
    #[error("basis is not an oriented eta-orthonormal frame (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("degenerate frame: {0}")]
    DegenerateFrame(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step size underflow at s = {s}")]
    StepSizeUnderflow { s: f64 },
    #[error("step budget exhausted at s = {s}")]
    TooManySteps { s: f64 },
    #[error("conserved quantity drifted by {residual:e} at s = {s}")]
    ConstraintViolation { s: f64, residual: f64 },
    #[error("frame drift {residual:e} after correction at s = {s}")]
    FrameDrift { s: f64, residual: f64 },
    #[error("state is inconsistent with v: {0}")]
    Inconsistent(String),
    #[error("hypercycle parameter t = {t} maps outside the unit disk")]
    OutsideDisk { t: f64 },
    #[error("disk point ({u}, {w}) is on or outside the boundary")]
    OnOrOutsideBoundary { u: f64, w: f64 },
    #[error("{count} critical points of mu found; at most one is allowed")]
    MultipleCriticalPoints { count: usize },
    #[error("{count} zeros of mu found; at most one is allowed")]
    MultipleZeros { count: usize },
    #[error("window too short for end analysis: needs |s| >= {needed}, got {got}")]
    WindowTooShort { needed: f64, got: f64 },
    #[error("trajectory violates the classification theorem: {}", .0.failed_checks().join(", "))]
    InconsistentWithTheorem(Box<ClassificationReport>),
    #[error("curve needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("time step {dt:e} exceeds the explicit stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("curvature law 1/sqrt(1 - A e^(2t)) is singular at t = {t}")]
    BlowupWindow { t: f64 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
