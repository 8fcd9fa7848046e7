use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectrum needs at least 2 eigenvalues, got {0}")]
    SpectrumTooSmall(usize),

    #[error("eigenvalue {index} is not finite ({value})")]
    NonFiniteEigenvalue { index: usize, value: f64 },

    /// Two eigenvalues coincide. The observable's spectrum is taken to be
    /// non-degenerate.
    #[error(
        "degenerate spectrum: eigenvalue {value} appears more than once \
         (the measured observable is assumed to have a non-degenerate spectrum)"
    )]
    DegenerateSpectrum { value: f64 },

    #[error("state has no amplitudes")]
    EmptyState,

    #[error("amplitude {index} is not finite")]
    NonFiniteAmplitude { index: usize },

    #[error("state is not normalized: sum of |amplitude|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("pointer spread delta_p must be finite and > 0, got {0}")]
    InvalidPointerSpread(f64),

    #[error("empty sequence")]
    EmptySequence,

    #[error("density matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("eigenstate has zero spread; strong comparison undefined")]
    ZeroSpread,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("histogram bins do not match the reference bins")]
    BinMismatch,

    #[error("{count} trajectories did not converge")]
    Unconverged { count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
