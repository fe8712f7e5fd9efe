use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide error type.
///
/// Construction errors (`NotSelfMap`, `NotTangent`, ...) are reported eagerly
/// by the builders; evaluation errors carry enough payload to diagnose the
/// offending point without re-running the computation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point {0} lies outside the closed unit disk")]
    PointOutsideDomain(Complex64),

    #[error("evaluation at {0} is within the guard band of a boundary atom")]
    AtEssentialSingularity(Complex64),

    #[error("boundary value unavailable at {0}: {1}")]
    BoundaryValueUnavailable(Complex64, &'static str),

    #[error("map is not a self-map of the disk (boundary modulus {0} > 1)")]
    NotSelfMap(f64),

    #[error("denominator vanishes inside the closed disk (root at {0})")]
    DenominatorVanishesInDisk(Complex64),

    #[error("composition depth {0} exceeds the cap of {1}")]
    CompositionTooDeep(usize, usize),

    #[error("target disk does not contain the origin in its interior")]
    ZeroNotInterior,

    #[error("target disk is not internally tangent to the unit circle")]
    NotTangent,

    #[error("target disk is not contained in the closed unit disk")]
    NotContained,

    #[error("zero {0} of a Blaschke factor must lie in the open disk")]
    ZeroOutsideDisk(Complex64),

    #[error("atom location {0} must lie on the unit circle")]
    AtomOffCircle(Complex64),

    #[error("truncation error bound {bound:.3e} exceeds the budget {budget:.3e} at |z| = {modulus}")]
    TruncationBudgetExceeded {
        bound: f64,
        budget: f64,
        modulus: f64,
    },

    #[error("target coincides with phi(0); the counting function diverges there")]
    TargetEqualsPhiOfZero,

    #[error("{0} did not converge: {1}")]
    NoConvergence(&'static str, String),

    #[error("atom quotient did not settle; raw curve: {0:?}")]
    AtomQuotientNotConvergent(Vec<(f64, f64)>),

    #[error("Clark density pole: phi({xi}) hits alpha within {dist:.3e}")]
    DensityPole { xi: Complex64, dist: f64 },

    #[error("kernel sequence violates the modulus hypothesis at index {index}: |theta(w)| = {value} > {bound}")]
    HypothesisViolated {
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("norm methods disagree beyond grid tolerance ({0:.3e} vs {1:.3e}); refine the grid")]
    GridTooCoarse(f64, f64),

    #[error("method not applicable: {0}")]
    MethodUnsupported(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration at {pointer}: {detail}")]
    InvalidConfig { pointer: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
