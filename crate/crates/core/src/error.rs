use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Errors raised by the library.
///
/// Variants that come from a numerical test carry the offending quantity so
/// that callers can report it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("eigenvalue spacing {gap:.3e} is below the clustering tolerance")]
    IllConditioned { gap: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Bloch vector (norm {norm})")]
    InvalidBloch { norm: f64 },

    #[error("ensembles represent different density matrices (residual {residual:.3e})")]
    NoEquivalence { residual: f64 },

    #[error("algebra closure did not stabilize within {rounds} rounds")]
    ClosureDiverged { rounds: usize },

    #[error("degenerate random sample after {attempts} attempts (seed {seed}): {what}")]
    DegenerateSample {
        seed: u64,
        attempts: usize,
        what: String,
    },

    #[error("algebra is not a factor: {0}")]
    NotAFactor(String),

    #[error("functional is not normalized (value on the unit {value})")]
    NotNormalized { value: f64 },

    #[error("functional is negative on an effect of the algebra (value {value:.3e})")]
    NotPositiveFunctional { value: f64, effect: ComplexMatrix },

    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("dilations describe different channels (residual {residual:.3e})")]
    NoIntertwiner { residual: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
