use thiserror::Error;

/// Errors produced by the geometry kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i},{j}) out of range for n = {n}")]
    IndexOutOfRange { n: usize, i: usize, j: usize },

    #[error("basis index ({i},{j}) must satisfy i > j")]
    NotLowerIndex { i: usize, j: usize },

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLength { got: usize, expected: usize },

    #[error("matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not special orthogonal (defect {0:e})")]
    NotSpecialOrthogonal(f64),

    #[error("Killing form of so(2) vanishes identically: so(2) is abelian, no P operator exists")]
    DegenerateKilling,

    #[error("curvature needs n >= 3: so(2) is abelian and the base circle has no 2-planes")]
    NoTwoPlanes,

    #[error("degenerate plane: |X|^2|Y|^2 - g(X,Y)^2 = {0:e}")]
    DegeneratePlane(f64),

    #[error("metric weight mu_{i}{j} = {value} must be positive and finite")]
    NonPositiveWeight { i: usize, j: usize, value: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid index regime: {0}")]
    InvalidRegime(String),

    #[error("index ({r},{s}) shares exactly one index with the base direction ({i},{j})")]
    NotDisjoint {
        i: usize,
        j: usize,
        r: usize,
        s: usize,
    },

    #[error("curve is not differentiable at t = {t}: {reason}")]
    NotDifferentiable { t: f64, reason: String },

    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite state at t = {0}")]
    NonFinite(f64),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("invalid step: {0}")]
    InvalidStep(String),

    #[error("tolerances must be positive (rtol = {rtol}, atol = {atol})")]
    InvalidTolerance { rtol: f64, atol: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewPoints { got: usize, need: usize },

    #[error("series argument {0} outside the convergence guard |z| <= 0.5")]
    SeriesRange(f64),

    #[error("numerical tolerance not reached: {0}")]
    Convergence(String),

    #[error("point is not on the hyperboloid x^2+y^2-z^2=1 (defect {0:e})")]
    NotOnHyperboloid(f64),

    #[error("point is not on the unit circle (defect {0:e})")]
    NotOnCircle(f64),

    #[error("vector is not tangent to the hyperboloid (defect {0:e})")]
    NotTangent(f64),

    #[error("degenerate chart line: a = b = 0")]
    DegenerateLine,

    #[error("endpoints coincide")]
    CoincidentPoints,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
