use thiserror::Error;

/// Failures raised by the geometry, warp, immersion and verification layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid finite-difference configuration: {0}")]
    InvalidFdConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("stencil leaves the domain along coordinate {coord} ({value} not in [{lower}, {upper}])")]
    BoundaryViolation {
        coord: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("field evaluation returned a non-finite value at {point:?}")]
    NonFiniteValue { point: Vec<f64> },
    #[error("metric is singular or not positive definite (condition number {condition:e})")]
    SingularMetric { condition: f64 },
    #[error("tangent vectors span a degenerate plane (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },
    #[error("warping function is not positive ({value}) at {point:?}")]
    NonPositiveWarp { point: Vec<f64>, value: f64 },
    #[error("parameter constraint violated: {0}")]
    ParameterConstraintViolated(String),
    #[error("invalid generalized Schwarzschild parameters: {0}")]
    InvalidGSParameters(String),
    #[error("non-positive denominator S_L + (n-2m)rho = {0}")]
    NonPositiveDenominator(f64),
    #[error("Jacobian is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },
    #[error("sigma is not positive ({value}) on the representation domain")]
    NonPositiveSigma { value: f64 },
    #[error("t = {t} lies outside the solution domain ({lower}, {upper})")]
    OutsideDomain { t: f64, lower: f64, upper: f64 },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
