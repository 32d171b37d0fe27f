use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },
    #[error("Lyapunov system is ill-conditioned (condition estimate {estimate:e})")]
    IllConditioned { estimate: f64 },
    #[error("state dimension {n} exceeds the dense solver cap {max}")]
    TooLarge { n: usize, max: usize },
    #[error("gain is not stabilizing (spectral abscissa {abscissa:e})")]
    NotStabilizing { abscissa: f64 },
    #[error("could not construct an initial stabilizing gain")]
    NoStabilizingInit,
    #[error("Kleinman iteration stalled after {iterations} iterations (residual {residual:e})")]
    Stalled { iterations: usize, residual: f64 },
    #[error("eigenvalue computation did not converge")]
    EigenFailure,
    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("flow left the admissible set at s = {s}")]
    LeftAdmissibleSet { s: f64 },
    #[error("estimator probe rejected after {attempts} attempts")]
    ProbeRejected { attempts: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("disturbance level must satisfy 0 <= w_bar < 0.5, got {0}")]
    InvalidWBar(f64),
    #[error("argument {0} is outside the admissible domain")]
    OutOfDomain(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
