use thiserror::Error;

/// Failures surfaced by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("sample grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("root classification failed for lambda = {lambda}: {detail}")]
    RootClassificationFailure { lambda: f64, detail: String },

    #[error("measured frequency gap {gap} is not positive")]
    GapDegenerate { gap: f64 },

    #[error("no control-time threshold: gap {gap} <= 4 * alpha_omega = {}", 4.0 * alpha_omega)]
    NoThreshold { gap: f64, alpha_omega: f64 },

    #[error("singular initial-condition system for mode {n}: {detail}")]
    SingularSystem { n: usize, detail: String },

    #[error("all modal amplitudes vanish")]
    AllAmplitudesZero,

    #[error("data has zero norm")]
    ZeroData,

    #[error("time stepper did not converge: {0}")]
    NotConverged(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("argument {w} lies within the pole guard of +-pi/T")]
    NearPole { w: num_complex::Complex64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("no admissible index within the retained {retained} modes")]
    NotFoundWithinRange { retained: usize },

    #[error("exponent coincidence: {0}")]
    ExponentCoincidence(String),

    #[error("Gram matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("Gram matrix condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },
}

/// Coarse grouping of [`Error`] variants, used by drivers to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Constraint,
    Convergence,
    Conditioning,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ConstraintViolation(_)
            | Error::GridTooCoarse(_)
            | Error::NoThreshold { .. }
            | Error::HypothesisViolated(_)
            | Error::NearPole { .. }
            | Error::ZeroData
            | Error::AllAmplitudesZero => ErrorClass::Constraint,
            Error::NotConverged(_)
            | Error::QuadratureNotConverged(_)
            | Error::RootClassificationFailure { .. }
            | Error::GapDegenerate { .. }
            | Error::NotFoundWithinRange { .. } => ErrorClass::Convergence,
            Error::SingularSystem { .. }
            | Error::ExponentCoincidence(_)
            | Error::NotPositiveDefinite { .. }
            | Error::IllConditioned { .. } => ErrorClass::Conditioning,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
