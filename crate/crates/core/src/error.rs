use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m - m†| = {defect:.3e} exceeds {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("singular linear system")]
    Singular,
    #[error("overflow: {0}")]
    Overflow(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate spectrum: lambda = 0 with omega1 = omega2 leaves the secular construction undefined")]
    Degenerate,
    #[error("basis mismatch: expected {expected} basis, got {found}")]
    BasisMismatch { expected: &'static str, found: &'static str },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration step size underflow at t = {t} ns (h = {h:.3e}); problem is too stiff")]
    Stiff { t: f64, h: f64 },
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("concurrence is numerically invalid: {0}")]
    Concurrence(String),

    #[error("{0}")]
    Io(String),
}
