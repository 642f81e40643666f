use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the library. Each variant maps onto one process exit class
/// through [`Error::exit_class`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("A1 is not Hermitian: ||A1 - A1*|| = {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("degenerate or non-finite interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("point {mu} lies outside the interval [{lo}, {hi}]")]
    OutsideInterval { mu: f64, lo: f64, hi: f64 },

    #[error("empty sample region")]
    EmptyRegion,

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("z = {z} lies on the cut of the physical sheet")]
    OnCut { z: Complex64 },

    #[error("z = {z} is {distance:e} away from the contour, inside the exclusion zone {guard:e}")]
    NearContour {
        z: Complex64,
        distance: f64,
        guard: f64,
    },

    #[error("z = {z} is not inside the region between the interval and the contour")]
    OutsideLens { z: Complex64 },

    #[error(
        "contour is not admissible at coupling scale {scale}: variation {variation:e} >= d^2/4 = {quarter_d2:e}"
    )]
    Inadmissible {
        variation: f64,
        distance: f64,
        quarter_d2: f64,
        scale: f64,
    },

    #[error("no admissible contour in the searched family")]
    NoAdmissibleContour,

    #[error("fixed-point iteration did not converge in {iterations} steps (last step {last_step:e})")]
    MaxIterations { iterations: usize, last_step: f64 },

    #[error("iterate left the uniqueness ball: ||X|| = {norm:e} >= r_max = {r_max:e}")]
    EscapedBall { norm: f64, r_max: f64 },

    #[error("spectrum of Z is {distance:e} from the contour node set")]
    SpectrumOnContour { distance: f64 },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("spectrum of Z is too close to the interval: distance {distance:e} < guard {guard:e}")]
    SpectrumNearInterval { distance: f64, guard: f64 },

    #[error("adaptive quadrature did not converge: estimated error {error:e} after {evaluations} evaluations")]
    Quadrature { error: f64, evaluations: usize },

    #[error("integration circle violates containment: {0}")]
    GammaContainment(String),

    #[error("configuration error: {0}")]
    Config(String),
}

/// Coarse outcome classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Inadmissible,
    Numerical,
    Config,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Inadmissible => 2,
            ExitClass::Numerical => 3,
            ExitClass::Config => 4,
        }
    }
}

impl Error {
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Inadmissible { .. } | Error::NoAdmissibleContour => ExitClass::Inadmissible,
            Error::Shape(_)
            | Error::NotHermitian { .. }
            | Error::DegenerateInterval { .. }
            | Error::InvalidContour(_)
            | Error::InvalidParameter(_)
            | Error::EmptyRegion
            | Error::Config(_) => ExitClass::Config,
            _ => ExitClass::Numerical,
        }
    }
}
