use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is zero")]
    ZeroOperator,

    #[error("operator is not a maximally entangled state: {0}")]
    NotMes(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("coisometries are not orthogonal (|A B*| = {overlap:.3e})")]
    NotOrthogonal { overlap: f64 },

    #[error("image leaves the expected four-dimensional subspace (residual {residual:.3e})")]
    SubspaceViolation { residual: f64 },

    #[error("phase alignment failed (coherence residual {residual:.3e})")]
    PhaseAlignment { residual: f64 },

    #[error("det J(G) = {det} is near neither 0 nor -1")]
    InconsistentChoi { det: Complex64 },

    #[error("commutant system has no solution (smallest singular ratio {ratio:.3e})")]
    NoSolution { ratio: f64 },

    #[error("commutant system is ambiguous (second smallest singular ratio {ratio:.3e})")]
    AmbiguousSolution { ratio: f64 },

    #[error("map does not preserve maximally entangled states: {0}")]
    NotPreserver(String),

    #[error("map is not invertible on span(MES) (smallest singular value {sigma_min:.3e})")]
    NotInvertible { sigma_min: f64 },

    #[error("recovered conjugation is not a Kronecker product (residual {residual:.3e})")]
    NotKronecker { residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Index(_) => "index",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::ZeroOperator => "zero_operator",
            Error::NotMes(_) => "not_mes",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotOrthogonal { .. } => "not_orthogonal",
            Error::SubspaceViolation { .. } => "subspace_violation",
            Error::PhaseAlignment { .. } => "phase_alignment",
            Error::InconsistentChoi { .. } => "inconsistent_choi",
            Error::NoSolution { .. } => "no_solution",
            Error::AmbiguousSolution { .. } => "ambiguous_solution",
            Error::NotPreserver(_) => "not_preserver",
            Error::NotInvertible { .. } => "not_invertible",
            Error::NotKronecker { .. } => "not_kronecker",
            Error::Invalid(_) => "invalid",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
