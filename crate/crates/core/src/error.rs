use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A random source ran out of trustworthy digits.
    #[error("precision exhausted: only {produced} of {requested} partial quotients are determined by the sampled bits")]
    PrecisionExhausted { produced: usize, requested: usize },

    /// An explicit quotient list is shorter than requested.
    #[error("explicit partial quotient list has {available} entries, {requested} requested")]
    ListExhausted { available: usize, requested: usize },

    #[error("source is not a quadratic irrational")]
    NotQuadratic,

    /// A distance to the nearest integer is too close to the accumulated error floor.
    #[error("singularity suspect at index {index}: distance {distance:e} within guard of error bound {bound:e}")]
    SingularitySuspect { index: u64, distance: f64, bound: f64 },

    #[error("invalid interval [{a}, {b}]: need 0 <= a < b <= 1 and 0 < b - a < 1")]
    InvalidInterval { a: f64, b: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("polynomial growth hypothesis not declared for this source")]
    HypothesisViolated,

    #[error("Fourier model cutoff {cutoff} below required {required} and not flagged as truncated")]
    TruncationFlagged { cutoff: u64, required: u64 },

    #[error("adaptive quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    ToleranceNotMet { tolerance: f64, estimate: f64 },

    #[error("invalid alpha specification `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for numerical guard failures, as opposed to usage mistakes.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted { .. }
                | Error::SingularitySuspect { .. }
                | Error::ToleranceNotMet { .. }
        )
    }
}
