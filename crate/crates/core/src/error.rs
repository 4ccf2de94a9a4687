use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be an odd prime (got {0}, which is out of range)")]
    OutOfRange(i64),
    #[error("dimension must be an odd prime (got even dimension {0})")]
    EvenDim(i64),
    #[error("dimension must be an odd prime (got composite {0})")]
    NonPrime(i64),
    #[error("{0} has no inverse modulo {1}")]
    ZeroInverse(i64, usize),
    #[error("matrix [[{0}, {1}], [{2}, {3}]] does not have determinant 1 mod {4}")]
    NotSymplectic(usize, usize, usize, usize, usize),
    #[error("no U_F formula variant satisfies covariance (best deviation {0:e})")]
    CovarianceFailure(f64),
    #[error("no Z_m eigenvalue convention reproduces the displacement action (best residual {0:e})")]
    ZmUnresolved(f64),
    #[error("displacement does not map basis {label} onto itself (residual {residual:e})")]
    ActionMismatch { label: String, residual: f64 },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a probability vector: {0}")]
    NotProbability(String),
    #[error("C-vectors do not form a regular simplex (Gram deviation {0:e})")]
    DegenerateSimplex(f64),
    #[error("Fourier eigenvalue modulus {modulus} deviates from 1 at a = {index}")]
    NonUnitEigenvalue { index: usize, modulus: f64 },
    #[error("ket is not normalised (norm {0})")]
    NotNormalized(f64),
    #[error("not a SIC fiducial (max overlap deviation {0:e})")]
    NotFiducial(f64),
    #[error("fiducial file: {0}")]
    Parse(String),
    #[error("invalid label {0:?}")]
    BadLabel(String),
}
