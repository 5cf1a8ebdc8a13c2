use thiserror::Error;

/// Errors raised across the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NonConvergence { sweeps: usize, off: f64 },

    #[error("invalid state: {check} check failed (magnitude {magnitude:e})")]
    InvalidState { check: &'static str, magnitude: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error(
        "state has a positive partial transpose (min eigenvalue {0:e}); no NPT witness exists"
    )]
    StateIsPpt(f64),

    #[error("off-form coefficient {row} x {col} = {magnitude:e} exceeds tolerance")]
    OffFormCoefficient {
        row: String,
        col: String,
        magnitude: f64,
    },

    #[error("aligned coefficient {label} = {value:e} is negative")]
    NegativeCoefficient { label: String, value: f64 },

    #[error("coefficient table has imaginary residue {0:e}")]
    ComplexCoefficients(f64),

    #[error("witness identity verification failed (residual {0:e})")]
    IdentityVerification(f64),

    #[error("post-selection on a null event (probability {0:e})")]
    NullPostselection(f64),

    #[error("correlation table shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("grid oracle supports d = 2 or 3 only, got d = {0} (cost grows as resolution^(4d-4))")]
    GridDimension(usize),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
