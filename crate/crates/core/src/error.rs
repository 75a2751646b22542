use thiserror::Error;

/// Errors raised by the numerical kernels and the physical constructions built on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not Hermitian: max |A - A^*| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("state is not faithful: min eigenvalue {min_eigenvalue:.3e} below floor {floor:.1e}")]
    NotFaithful { min_eigenvalue: f64, floor: f64 },

    #[error("density matrix trace {0:.15} differs from 1")]
    BadTrace(f64),

    #[error("eigensolver failed to converge ({0})")]
    Convergence(String),

    #[error("matrix exponential overflow: |scale * M|_1 = {0:.3e}")]
    Overflow(f64),

    #[error("eigenbasis is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("[H_S, omega_S] = {0:.3e}: small-system reference state is not invariant")]
    NonInvariantSmallState(f64),

    #[error("[omega, H_fr] = {0:.3e}: reference state does not commute with the free Hamiltonian")]
    NonCommutingFreeDynamics(f64),

    #[error("system not declared time-reversal invariant")]
    NotTimeReversalInvariant,

    #[error("inverse temperature must be positive, got {0}")]
    BadTemperature(f64),

    #[error("ancilla state commutes with sigma_z: no tomographic signal")]
    NoTomographicSignal,

    #[error("ancilla protocol needs purely imaginary alpha, got {0}")]
    AlphaNotImaginary(num_complex::Complex64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the dense superoperator cap {cap}; use factored evaluation")]
    DimensionCap { dim: usize, cap: usize },

    #[error("resolvent evaluated at spectrum (distance {0:.3e})")]
    ResolventAtSpectrum(f64),

    #[error("non-simple dominant resonance: {0}")]
    NonSimpleDominant(String),

    #[error("vectors orthogonal to all spectral subspaces")]
    NoSpectralOverlap,

    #[error("eigenvalue 0 of L_1/2 is not semisimple")]
    NonSemisimpleKernel,

    #[error("Markov model invalid: {0}")]
    InvalidModel(String),

    #[error("log undefined for non-positive sample {value:.3e} at t = {t}")]
    NonPositiveSample { t: f64, value: f64 },

    #[error("cost guard: {0}")]
    CostGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
