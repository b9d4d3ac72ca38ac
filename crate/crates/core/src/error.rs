use crate::linalg::C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: &'static str, residual: f64 },
    #[error("|lambda| = {0:.3e} is too small for the asymptotic approximant")]
    DegenerateLambda(f64),
    #[error("contour passes within {ratio:.3e} (relative) of a root after all dilations")]
    ContourTooClose { ratio: f64 },
    #[error("winding number {raw:.6} is not close to an integer")]
    NonIntegerWinding { raw: f64 },
    #[error("counting lemma fails for every N <= {n_max}")]
    CountMismatch { n_max: usize },
    #[error("discriminant at {label} is {found}, expected {expected}")]
    SignMismatch { label: String, expected: f64, found: C64 },
    #[error("lost track of the root branch near {0}")]
    BranchTrackingFailed(C64),
    #[error("no real critical point found near n = {0}")]
    NoCrossingFound(i64),
    #[error("arc corrector failed at y = {y:.6e}")]
    StepFailure { y: f64 },
    #[error("arc endpoint is {distance:.3e} away from the nearest periodic eigenvalue")]
    EndpointMismatch { distance: f64 },
    #[error("discriminant is not monotone along the arc at sample {0}")]
    MonotonicityViolation(usize),
    #[error("{what} has nonzero mean {mean:.3e}")]
    NonzeroMean { what: &'static str, mean: f64 },
    #[error("solution blew up at x = {x:.6e} (norm {norm:.3e})")]
    BlowupDetected { x: f64, norm: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
