use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("elements belong to different algebras")]
    AlgebraMismatch,

    #[error("block shape mismatch: {0}")]
    Shape(String),

    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    #[error("function is undefined on the spectrum (eigenvalue {eigenvalue})")]
    UndefinedOnSpectrum { eigenvalue: f64 },

    #[error("element is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("element is not invertible (inverse residual {residual:e})")]
    Singular { residual: f64 },

    #[error("zero tangent vector")]
    ZeroVector,

    #[error("triangle has coincident vertices")]
    CoincidentVertices,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("all generators are numerically zero")]
    EmptySubspace,

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("point is not in the submanifold (residual {residual:e})")]
    NotInSubmanifold { residual: f64 },

    #[error("subspace fails the double-bracket closure test (residual {residual:e})")]
    NotClosed { residual: f64 },

    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("point is too far from the submanifold (distance at least {lower_bound:.3})")]
    Conditioning { lower_bound: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
