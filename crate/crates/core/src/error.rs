use thiserror::Error;

/// Errors produced by the solvers and their supporting kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix pencil is singular for every value of the parameter")]
    DegeneratePencil,

    #[error("quadric does not describe a nondegenerate ellipsoid (scale {0} <= 0)")]
    DegenerateQuadric(f64),

    #[error("linear system is singular")]
    SingularSystem,

    #[error("unknown analytic instance `{0}`")]
    UnknownName(String),

    #[error("no KKT candidate survived the feasibility filter")]
    NoFeasibleCandidate,

    #[error("dimension {0} exceeds the global method guard (d <= 32)")]
    DimensionTooLarge(usize),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
