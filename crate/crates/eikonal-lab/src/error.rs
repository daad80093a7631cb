use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entropy index {0} out of range, expected 1 or 2")]
    InvalidEntropyIndex(usize),
    #[error("point lies outside the closed unit disc: |z| = {0}")]
    OutsideDisc(f64),
    #[error("mollifier under-resolved: epsilon = {epsilon}, grid spacing = {h} (need epsilon >= 2h)")]
    UnderResolvedKernel { epsilon: f64, h: f64 },
    #[error("kernel spacing {kernel_h} does not match field spacing {field_h}")]
    KernelSpacingMismatch { kernel_h: f64, field_h: f64 },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("node ({0}, {1}) too close to the boundary for this stencil")]
    NearBoundary(usize, usize),
    #[error("field is not unit-norm: max | |m| - 1 | = {0}")]
    NotUnitNorm(f64),
    #[error("curl residual {max} exceeds tolerance {tol}; field does not admit a potential")]
    CurlResidual { max: f64, tol: f64 },
    #[error("invalid cutoff profile: {0}")]
    InvalidCutoff(String),
    #[error("half-angle {0} out of range (0, pi/2]")]
    InvalidHalfAngle(f64),
    #[error("step size must be positive, got {0}")]
    InvalidStepSize(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("non-finite energy encountered during descent")]
    NonFiniteEnergy,
    #[error("test function support touches the boundary margin")]
    TestTouchesBoundary,
    #[error("empty sampling region")]
    EmptyRegion,
    #[error("loop under-resolved: angle increment {0} >= pi/2 between adjacent nodes")]
    UnderResolvedLoop(f64),
    #[error("field values must stay inside the closed unit disc, found |w| = {0}")]
    RangeEscapesDisc(f64),
    #[error("field range violates the annulus constraint: |w| = {0}")]
    RangeOutsideAnnulus(f64),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
