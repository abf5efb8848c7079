//! Error taxonomy shared by every synthesis and verification module.

use thiserror::Error;

/// Everything that can go wrong while building or checking a synthesis.
#[derive(Debug, Clone, Error)]
pub enum SynthError {
    /// An operand that must be Hermitian is not, within [`crate::tol::HERMITICITY_TOL`].
    #[error("operand is not Hermitian: defect {defect:.3e}{}", at.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    NonHermitianInput {
        defect: f64,
        /// Time sample at which the offending matrix was produced, if known.
        at: Option<f64>,
    },

    /// A time sample fell outside the path domain `[0, τ]`.
    #[error("t = {t} outside the path domain [0, {tau}]")]
    DomainError { t: f64, tau: f64 },

    /// `r₀ = 0`: the orthogonal decomposition of `ρ(0)` is not unique, so the
    /// alpha-gauge machinery is unavailable.
    #[error("initial state is maximally mixed (r0 = {r0:.3e}); orthogonal decomposition requires r0 > 0")]
    DegenerateInitialState { r0: f64 },

    /// An operation restricted to one path kind was handed the other.
    #[error("path kind mismatch: operation requires a {expected} path")]
    KindMismatch { expected: crate::path::PathKind },

    /// A gauge input failed validation against the state it must respect.
    #[error("gauge mismatch: {0}")]
    GaugeMismatch(String),

    /// A trajectory family was constructed with out-of-range parameters.
    #[error("invalid family parameter: {0}")]
    InvalidFamilyParameter(String),

    /// The shrink Hamiltonian coefficient `ṙ/(4√(1−r²))` diverges: the path
    /// touches `r = 1` with nonzero radial speed.
    #[error("shrink path touches r = 1 with nonzero radial speed {rdot:.3e}")]
    SingularShrinkStart { rdot: f64 },

    /// The trace sum defining the geometric phase has negligible modulus.
    #[error("geometric phase undefined: trace sum modulus {modulus:.3e} below cutoff")]
    UndefinedPhase { modulus: f64 },

    /// A gauge function `α_k(t)` does not vanish at `t = 0`.
    #[error("alpha gauge must vanish at t = 0, got {value:.3e}")]
    NonzeroAlphaAtZero { value: f64 },

    /// A time grid could not be constructed.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A sampled-path table failed to load or validate.
    #[error("sampled path: {0}")]
    SampledPath(String),
}

impl SynthError {
    /// Stable machine-readable tag (used by report entries and the CLI).
    pub fn kind(&self) -> &'static str {
        match self {
            SynthError::NonHermitianInput { .. } => "NonHermitianInput",
            SynthError::DomainError { .. } => "DomainError",
            SynthError::DegenerateInitialState { .. } => "DegenerateInitialState",
            SynthError::KindMismatch { .. } => "KindMismatch",
            SynthError::GaugeMismatch(_) => "GaugeMismatch",
            SynthError::InvalidFamilyParameter(_) => "InvalidFamilyParameter",
            SynthError::SingularShrinkStart { .. } => "SingularShrinkStart",
            SynthError::UndefinedPhase { .. } => "UndefinedPhase",
            SynthError::NonzeroAlphaAtZero { .. } => "NonzeroAlphaAtZero",
            SynthError::InvalidGrid(_) => "InvalidGrid",
            SynthError::SampledPath(_) => "SampledPath",
        }
    }
}
