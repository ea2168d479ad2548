use thiserror::Error;

/// Library-wide error type.
///
/// Variants map onto the CLI exit codes: configuration problems exit 2,
/// numerical-validation failures exit 3, I/O and format problems exit 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("radial eigenproblem did not converge: residual {residual:.3e} exceeds {tol:.3e}")]
    Resolution { residual: f64, tol: f64 },

    #[error("truncation parameter admits no basis functions (T too large for bandlimit)")]
    EmptyBasis,

    #[error("numerical validation failed: {0}")]
    Validation(String),

    #[error("{0}")]
    Mismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad file format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Params(_) | Error::Mismatch(_) => 2,
            Error::Resolution { .. } | Error::EmptyBasis | Error::Validation(_) => 3,
            Error::Io(_) | Error::Format(_) => 4,
        }
    }
}
