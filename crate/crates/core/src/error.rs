use thiserror::Error;

use crate::stokes::ClassCode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("moduli coordinates are undefined for a = 0")]
    DegenerateCoordinates,

    #[error("path passes within {distance:.3e} of a turning point (clearance {clearance:.3e})")]
    ClearanceViolation { distance: f64, clearance: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} (estimate {estimate:.3e})")]
    QuadratureFailed { tol: f64, estimate: f64 },

    #[error("{0} is not a turning point of the potential")]
    NotATurningPoint(String),

    #[error("turning point {0} is not simple")]
    DegenerateTurningPoint(String),

    #[error("square-root branch continuation is ambiguous at {0}")]
    BranchAmbiguity(String),

    #[error("Stokes line from {from} did not resolve to a turning point or asymptotic ray")]
    UnresolvedStokesLine { from: String },

    #[error("Stokes graph is ambiguous between classes {nearest:?}: {reason}")]
    AmbiguousClass {
        nearest: Vec<ClassCode>,
        reason: String,
    },

    #[error("Stokes graph violates {0}")]
    GraphInvariant(String),

    #[error("operation requires class {expected}, got {found}")]
    WrongClass { expected: ClassCode, found: ClassCode },

    #[error("turning-point labels are unavailable: {0}")]
    LabelsUnavailable(String),

    #[error("Newton iteration failed: {0}")]
    NewtonFailed(String),

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("radius {radius} too small: WKB tail estimate {tail:.3e} exceeds {tol:.1e}")]
    RadiusTooSmall { radius: f64, tail: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
