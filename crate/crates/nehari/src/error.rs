use thiserror::Error;

use crate::solver::SolveReport;

/// Errors across grid construction, energy evaluation, solving and the
/// experiment layer. Non-convergence of a solve is a reported status, not an
/// error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Nehari projection undefined: the field is zero or its nonlinear part vanishes")]
    ProjectionUndefined,

    #[error("degenerate initial guess: {0}")]
    DegenerateInit(String),

    #[error("base state is off the Nehari manifold: |tau| = {tau:.3e} exceeds {bound:.3e}")]
    BaseOffManifold { tau: f64, bound: f64 },

    #[error("test profile w must be nonzero")]
    ZeroTestFunction,

    #[error("base state must have all components nonzero")]
    BaseNotNontrivial,

    #[error("operation requires 1 < q < 2, got q = {0}")]
    RequiresSubquadratic(f64),

    #[error("threshold scan requires a two-component system, got d = {0}")]
    RequiresTwoComponents(usize),

    #[error(
        "invalid bisection bracket: classification at b = {b_lo} is {lo_class}, at b = {b_hi} is {hi_class}"
    )]
    InvalidBracket {
        b_lo: f64,
        b_hi: f64,
        lo_class: String,
        hi_class: String,
        reports: Box<(SolveReport, SolveReport)>,
    },

    #[error("subsystem {subset:?} failed: {source}")]
    SubsystemFailed {
        subset: Vec<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
