use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("eigenvector matrix is singular (condition estimate {condition:.3e})")]
    NonDiagonalizable { condition: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("matrix is singular (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("exponent norm {norm:.3e} exceeds the configured bound {limit:.3e}")]
    Overflow { norm: f64, limit: f64 },

    #[error("resolvent pole {eigenvalue} lies on the integration contour")]
    PoleOnContour { eigenvalue: Complex64 },

    #[error("special function evaluation did not converge at z = {z}")]
    SpecialFunction { z: Complex64 },

    #[error("hermiticity violated: defect {defect:.3e} exceeds {tolerance:.3e}")]
    HermiticityViolation { defect: f64, tolerance: f64 },

    #[error("history covers {available} fs but {requested} fs was requested")]
    InsufficientHistory { requested: f64, available: f64 },

    #[error("equilibrium density is not stationary: residual {residual:.3e}")]
    StationarityFailure { residual: f64 },

    #[error("energy quadrature not converged: relative change {relative_change:.3e}")]
    QuadratureNotConverged { relative_change: f64 },

    #[error("stationarity equation is singular: denominator {denominator:.3e}")]
    SingularSylvester { denominator: f64 },

    #[error("propagation diverged at t = {t} fs: {reason}")]
    Divergence { t: f64, reason: &'static str },

    #[error("invalid system specification: {0}")]
    InvalidSpec(alloc::string::String),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

impl Error {
    /// Errors that come from the input rather than from the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
        )
    }
}
