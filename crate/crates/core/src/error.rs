use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown scenario id `{0}`")]
    UnknownScenario(String),
    #[error("parameter `{name}` = {value} outside declared range [{min}, {max}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("base point {s} outside the parameter disk |s| < {s_max}")]
    BasePointOutOfDisk { s: Complex64, s_max: f64 },
    #[error("fiber positivity violated at s = {s}, z = {z}: d_zz̄ φ = {value:e}")]
    PositivityViolation { s: Complex64, z: Complex64, value: f64 },
    #[error("quadrature resolution m = {m} invalid (need even m in [8, 1024])")]
    QuadratureResolution { m: usize },
    #[error("non-finite integrand sample at node {node} (z = {z} in {chart} chart)")]
    NonFinite {
        node: usize,
        z: Complex64,
        chart: &'static str,
    },
    #[error("quadrature unresolved: relative error estimate {err_est:e} exceeds gate {gate:e} (m = {m}, p = {p})")]
    QuadratureUnresolved {
        err_est: f64,
        gate: f64,
        m: usize,
        p: usize,
    },
    #[error("Gram matrix ill-conditioned: condition number {cond:e} above limit {limit:e}")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("Gram matrix not positive definite")]
    NotPositiveDefinite,
    #[error("solve residual {residual:e} exceeds bound {bound:e}")]
    SolveResidual { residual: f64, bound: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("expansion fit needs at least {need} distinct orders p, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("least-squares design is rank deficient")]
    RankDeficient,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
