use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("trajectory entered the pole band: |sin(theta)| = {sin_theta:e} below {threshold:e}")]
    PoleProximity { sin_theta: f64, threshold: f64 },

    #[error("energy {energy} is not reachable from the requested spin direction")]
    EnergyUnreachable { energy: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalue {value} is below the Heisenberg bound")]
    BelowHeisenberg { value: f64 },

    #[error("determinant {value} is below 1/4")]
    DeterminantBelowQuarter { value: f64 },

    #[error("linearly dependent tangent vectors (residual norm {norm:e})")]
    RankDeficient { norm: f64 },

    #[error("integration step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("time window spans {decades:.2} decades, need at least {required}")]
    InsufficientSpan { decades: f64, required: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("subsystem selection must name whole conjugate pairs: {0}")]
    PairSelection(String),

    #[error("boson cutoff {cutoff} too small for mean occupation {mean_occupation:.3}")]
    CutoffTooSmall { cutoff: usize, mean_occupation: f64 },

    #[error("Hilbert space dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
