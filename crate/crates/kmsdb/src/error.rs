use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max|M - M^dag| = {residual:.3e}")]
    SymmetryViolation { residual: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("function is not finite at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below -{clamp_tol:.3e}")]
    NotPsd { eigenvalue: f64, clamp_tol: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{nu:.6e} is not a Bohr frequency cluster of the Hamiltonian")]
    UnknownFrequency { nu: f64 },

    #[error("model too large: {0}")]
    Size(String),

    #[error("invalid weight profile '{name}': {reason}")]
    InvalidProfile { name: String, reason: String },

    #[error("invalid acceptance rule: {0}")]
    InvalidRule(String),

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("map is not detailed balanced: residual {residual:.3e} exceeds {tol:.3e}")]
    Unbalanced { residual: f64, tol: f64 },

    #[error("transition part too strong: ||T'^dag[I]|| = {norm:.6e} > 1; rescale by {suggested_scale:.6e}")]
    Normalization { norm: f64, suggested_scale: f64 },

    #[error("recursion level too shallow: I - b^2 B has eigenvalue {eigenvalue:.3e}")]
    LevelTooShallow { eigenvalue: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable short identifier, used for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SymmetryViolation { .. } => "symmetry-violation",
            Error::NonFinite { .. } => "non-finite",
            Error::Domain { .. } => "domain",
            Error::NotPsd { .. } => "not-psd",
            Error::Shape(_) => "shape",
            Error::UnknownFrequency { .. } => "unknown-frequency",
            Error::Size(_) => "size",
            Error::InvalidProfile { .. } => "invalid-profile",
            Error::InvalidRule(_) => "invalid-rule",
            Error::Accuracy(_) => "accuracy",
            Error::Precondition(_) => "precondition",
            Error::Unbalanced { .. } => "unbalanced",
            Error::Normalization { .. } => "normalization",
            Error::LevelTooShallow { .. } => "level-too-shallow",
            Error::Invalid(_) => "invalid-input",
        }
    }
}
