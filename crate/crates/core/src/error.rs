use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {point} is within {distance:e} of the pole {nearest}")]
    Pole {
        point: String,
        nearest: Complex64,
        distance: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("function is not even: {0}")]
    NotEven(String),

    #[error("function is not generalized positive: {0}")]
    NotGpe(String),

    #[error("D singular, use --regularize (smallest eigenvalue {min_eig:e})")]
    SingularD { min_eig: f64 },

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("realization is not minimal: {0}")]
    NotMinimal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::NotEven(_)
            | Error::NotGpe(_)
            | Error::SingularD { .. }
            | Error::Infeasible(_)
            | Error::NotMinimal(_) => 1,
            Error::Pole { .. } | Error::NumericalFailure(_) | Error::Unsupported(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
