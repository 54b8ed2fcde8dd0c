use thiserror::Error;

use crate::jet::DomainError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("s = {s} lies outside the domain of the {kind} profile")]
    PhiDomain { kind: &'static str, s: f64 },
    #[error("singular Q: |phi - s phi'| < 1e-12 at s = {s}")]
    SingularQ { s: f64 },
    #[error("degenerate direction: alpha(x, y) = 0")]
    DegenerateDirection,
    #[error("degenerate metric: determinant {det:e} below threshold")]
    DegenerateMetric { det: f64 },
    #[error("degenerate flag: Gram determinant {gram:e}")]
    DegenerateFlag { gram: f64 },
    #[error("chart point outside the hemisphere chart: |v| = {norm}")]
    OutOfChart { norm: f64 },
    #[error("F is not positive on the fiber sphere at x")]
    NonPositiveFiber,
    #[error("ODE coefficient degenerate at s = {s}")]
    DegenerateOde { s: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}
