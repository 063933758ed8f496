use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number state |{n},{m}> exceeds the per-mode cutoff {cutoff}")]
    CutoffViolation { n: usize, m: usize, cutoff: usize },

    #[error("operands live in different spaces: {left} vs {right}")]
    IncompatibleSpaces { left: String, right: String },

    #[error("state is not normalized (norm = {norm:.3e})")]
    Normalization { norm: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("truncated tail probability {tail:.3e} at cutoff {cutoff} exceeds tolerance {tolerance:.1e}")]
    Truncation { tail: f64, tolerance: f64, cutoff: usize },

    #[error("no cutoff up to {max_cutoff} brings the tail below {tolerance:.1e}")]
    CutoffSearchExhausted { tolerance: f64, max_cutoff: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("eigenvalue {value:.3e} is below the positivity floor {floor:.1e}")]
    NegativeEigenvalue { value: f64, floor: f64 },

    #[error("filter selects probability {probability:.3e}; filtered state undefined")]
    EmptySelection { probability: f64 },

    #[error("abscissa x = {x} outside [0, {max}]")]
    GridOutOfRange { x: f64, max: f64 },

    #[error("eigendecomposition failed to converge")]
    Eigen,
}

impl Error {
    /// Errors that stem from caller-supplied parameters rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::GridOutOfRange { .. }
                | Error::CutoffViolation { .. }
                | Error::BasisMismatch(_)
        )
    }
}
