use thiserror::Error;

/// Errors raised by the transform, solver and spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("intervals overlap or are degenerate: {0}")]
    Overlap(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("index {index} out of range for {len} intervals")]
    Index { index: usize, len: usize },
    #[error("point outside the admissible domain: {0}")]
    Domain(String),
    #[error("adaptive quadrature did not converge: {0}")]
    Convergence(String),
    #[error("data too singular at the endpoints: {0}")]
    SingularData(String),
    #[error("data is not in the range of the finite Hilbert transform (moment {moment:.3e} > {tol:.3e})")]
    Range { moment: f64, tol: f64 },
    #[error("theta has a vanishing diagonal entry at row {0}; degenerate-diagonal systems are not supported")]
    DegenerateDiagonal(usize),
    #[error("spectral parameter lambda must be nonzero")]
    ZeroLambda,
    #[error("system is numerically singular (sigma_min = {sigma_min:.3e}, threshold {threshold:.3e})")]
    NearSingular { sigma_min: f64, threshold: f64 },
    #[error("theta is not symmetric (max asymmetry {0:.3e})")]
    Symmetry(f64),
    #[error("evaluation point {0} coincides with an interval endpoint")]
    Endpoint(f64),
    #[error("resolvent kernel evaluated on its diagonal z = x = {0}")]
    Coincidence(f64),
    #[error("Bezout matrix eigenvalue {0:.3e} is not positive")]
    NonPositiveEigenvalue(f64),
    #[error("parameter t = {t} exceeds the tabulated range |t| <= {limit}")]
    RangeExceeded { t: f64, limit: f64 },
    #[error("low-frequency range test failed on channel {channel} (score {score:.3e} > {tol:.3e})")]
    RangeViolation { channel: usize, score: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
