use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("non-positive asymptotic density: {0}")]
    NonPositiveDensity(String),

    #[error("bad grid specification: {0}")]
    BadGridSpec(String),

    #[error("bad boundary specification: {0}")]
    BadBoundarySpec(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular Jacobian at pivot {0}")]
    SingularJacobian(usize),

    #[error("Newton failed to converge at B = {coupling}: residual {residual:e} after {iterations} iterations")]
    NoConvergence {
        coupling: f64,
        residual: f64,
        iterations: usize,
        /// Sup-norm residual after each iteration.
        history: Vec<f64>,
        /// Best iterate seen (interleaved plus/minus samples).
        best: Vec<f64>,
    },

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error("ill-conditioned tail fit: {0}")]
    IllConditionedFit(String),

    #[error("envelope selection failed: {0}")]
    SelectionFailed(String),

    #[error("envelope branch {branch} is inconsistent with B = {coupling}")]
    BranchMismatch { branch: &'static str, coupling: f64 },

    #[error("uniqueness probe needs at least two converged seeds, got {0}")]
    TooFewSeeds(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Variant name, used as a machine-readable error tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::NonPositiveDensity(_) => "NonPositiveDensity",
            Error::BadGridSpec(_) => "BadGridSpec",
            Error::BadBoundarySpec(_) => "BadBoundarySpec",
            Error::InvalidOptions(_) => "InvalidOptions",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::SingularJacobian(_) => "SingularJacobian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::EigenFailure(_) => "EigenFailure",
            Error::IllConditionedFit(_) => "IllConditionedFit",
            Error::SelectionFailed(_) => "SelectionFailed",
            Error::BranchMismatch { .. } => "BranchMismatch",
            Error::TooFewSeeds(_) => "TooFewSeeds",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures of the nonlinear iteration rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::SingularJacobian(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
