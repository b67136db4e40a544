use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("analytic continuation unsupported for {0} models")]
    UnsupportedContinuation(&'static str),
    #[error("evaluation at branch point {0}")]
    BranchPoint(String),
    #[error("quadrature failed: error estimate {estimate:e} exceeds tolerance {tolerance:e} after {subdivisions} subdivisions")]
    QuadratureFailure {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },
    #[error("root search did not converge after {iterations} iterations (|h| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("degenerate roots: |Ω₊ − Ω₋| = {separation:e}")]
    DegenerateRoots { separation: f64 },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("truncated inversion tail estimate {estimate:e} exceeds {limit:e}")]
    Truncation { estimate: f64, limit: f64 },
    #[error("singular denominator |μ − ω0 − Σ(μ)| = {0:e}")]
    SingularDenominator(f64),
    #[error("basis unavailable: {0}")]
    BasisUnavailable(String),
    #[error("grid too narrow: initial state is {0:e} at the edges")]
    GridTooNarrow(f64),
    #[error("norm drift {drift:e} at step {step} exceeds the stability limit")]
    Instability { step: usize, drift: f64 },
}

impl Error {
    /// True for failures caused by invalid input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::Domain(_)
                | Error::UnsupportedContinuation(_)
                | Error::BranchPoint(_)
                | Error::BasisUnavailable(_)
                | Error::GridTooNarrow(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
