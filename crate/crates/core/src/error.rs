use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hurst parameter {0} outside (0, 1)")]
    HurstDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("circulant embedding is not nonnegative definite: most negative eigenvalue {min_eigenvalue:e} (tolerance {tolerance:e})")]
    NegativeEigenvalue { min_eigenvalue: f64, tolerance: f64 },

    #[error("covariance matrix is not positive definite ({n} x {n})")]
    NotPositiveDefinite { n: usize },

    #[error("cholesky backend limited to {max} steps, requested {requested}")]
    CholeskyTooLarge { requested: usize, max: usize },

    #[error("insufficient resolution: level {required} required, path has level {actual}")]
    InsufficientResolution { required: u32, actual: u32 },

    #[error("estimator undefined: zero coefficient norm at level {level}")]
    Degenerate { level: u32 },

    #[error("insufficient levels: n = {n} must exceed m + 1 = {}", m + 1)]
    InsufficientLevels { n: u32, m: usize },

    #[error("non-finite drift value {value} at grid index {index}")]
    DriftEvaluation { index: usize, value: f64 },

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("internal consistency error: closed form {closed_form} vs beta combination {combination}")]
    Inconsistent { closed_form: f64, combination: f64 },

    #[error("rate fit failed: {0}")]
    RateFit(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error: 2 usage/config, 3 degenerate data,
    /// 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate { .. } => 3,
            Error::NegativeEigenvalue { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Inconsistent { .. }
            | Error::RateFit(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::HurstDomain(h))
    }
}
