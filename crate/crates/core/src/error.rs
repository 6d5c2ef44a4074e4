use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("factor index {index} out of range for {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel trace deviation {0:.3e} exceeds 1e-6; increase n_max")]
    TraceDeviation(f64),

    #[error("trace drift {drift:.3e} at step {step} exceeds 1e-8")]
    TraceDrift { step: usize, drift: f64 },

    #[error("chain cursor exhausted after {0} bins")]
    CursorExhausted(usize),

    #[error("state would need {0} amplitudes (limit 2^22)")]
    DimensionOverflow(u128),

    #[error("t = {t} is past the grid recurrence time {limit:.4}")]
    Recurrence { t: f64, limit: f64 },

    #[error("analytic oracle requires an undriven two-level system: {0}")]
    NotTwoLevel(String),
}

impl Error {
    /// Guard violations raised by the numerical kernels, as opposed to bad input.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::TraceDeviation(_)
                | Error::TraceDrift { .. }
                | Error::CursorExhausted(_)
                | Error::DimensionOverflow(_)
                | Error::Recurrence { .. }
        )
    }
}
