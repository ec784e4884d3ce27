use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy {energy} lies outside the band [{lower}, {upper}]")]
    OutOfBand { energy: f64, lower: f64, upper: f64 },

    #[error("wavenumber {k} is outside the allowed range {range}")]
    WavenumberOutOfRange { k: f64, range: &'static str },

    #[error("wavenumber {k} is a band edge where the group velocity vanishes")]
    DegenerateMode { k: f64 },

    #[error("root search did not converge in {iterations} iterations on bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("bath must be given as explicit modes, got an analytic flat bath")]
    AnalyticBath,

    #[error("matrix is not Hermitian (entry ({row}, {col}) differs from its transpose conjugate)")]
    NotHermitian { row: usize, col: usize },

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("memory function evaluated at {omega}, outside its tabulated range [{lo}, {hi}]")]
    OutOfRange { omega: f64, lo: f64, hi: f64 },

    #[error("integrator step size underflow at t = {t} (step {step:e}, norm {norm})")]
    Stiffness { t: f64, step: f64, norm: f64 },

    #[error("wavepacket geometry: {0}")]
    Geometry(String),

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("empty {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
