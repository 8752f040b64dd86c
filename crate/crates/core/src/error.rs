use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("covariance matrix is unphysical: smallest symplectic eigenvalue {0}")]
    Unphysical(f64),

    #[error("symplectic spectrum failed +/- pairing (mismatch {0:e})")]
    BrokenSpectrum(f64),

    #[error("cannot condition on a quadrature with zero variance")]
    ZeroVariance,

    #[error("unsupported combination {protocol} {recon}: {reason}")]
    Unsupported { protocol: String, recon: String, reason: String },

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("rate is not monotone in W across the bracket [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },

    #[error("no sign change of the rate for W up to {0}")]
    NoBracket(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("eigenvalue extraction failed: {0}")]
    Extraction(String),

    #[error("singular sample covariance")]
    SingularSample,

    #[error("degenerate variance in simulation: {0}")]
    DegenerateVariance(String),

    #[error("rank-deficient probe set: {0}")]
    RankDeficient(String),

    #[error("channel violates complete positivity (min eigenvalue {min_eig:e}, allowed {allowed:e})")]
    NotCompletelyPositive { min_eig: f64, allowed: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Numeric failures (solver or extraction) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonMonotone { .. }
                | Error::NoBracket(_)
                | Error::Extraction(_)
                | Error::BrokenSpectrum(_)
                | Error::SingularSample
                | Error::DegenerateVariance(_)
        )
    }
}
