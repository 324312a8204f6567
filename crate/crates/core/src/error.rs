use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight at index {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("total mass {total} is not within 1e-9 of 1")]
    MassNotNormalized { total: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mixture weights do not form a probability vector")]
    NotAProbabilityVector,

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: String,
        cap: usize,
    },

    #[error("polytope H is unbounded")]
    UnboundedPolytope,

    #[error("polytope H is empty")]
    EmptyPolytope,

    #[error("parameter set is empty or admits no feasible loss")]
    EmptyTheta,

    #[error("parameters outside the domain of case `{case}`: {reason}")]
    OutOfDomain { case: String, reason: String },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn cap(what: &'static str, needed: impl ToString, cap: usize) -> Self {
        Error::CapExceeded {
            what,
            needed: needed.to_string(),
            cap,
        }
    }

    pub fn dim(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch { expected, got }
    }
}
