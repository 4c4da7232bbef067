//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// `normalize: empty branch`
    #[error("empty branch")]
    EmptyBranch,

    /// Two states disagree on spectator or mode arity.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// Spectator qubit index out of range.
    #[error("spectator index {0} out of range")]
    BadQubitIndex(usize),

    /// Mode index out of range.
    #[error("mode index {0} out of range")]
    BadModeIndex(usize),

    /// A mode expected to hold exactly one photon does not.
    #[error("mode {0} is not singly occupied")]
    ModeNotAQubit(usize),

    /// A mode expected to be empty is not.
    #[error("mode {0} is not vacuum")]
    ModeNotVacuum(usize),

    /// Transmissivities must lie strictly inside (0, 1).
    #[error("transmissivities must lie strictly inside (0, 1): mu={mu}, nu={nu}")]
    InvalidTransmissivity { mu: f64, nu: f64 },

    /// The two beam-splitter input modes must differ.
    #[error("beam splitter inputs must be distinct modes (got {0} twice)")]
    DegenerateModes(usize),

    /// A constructor or protocol was asked for a state that is too small.
    #[error("state size must be at least {min} (got {got})")]
    SizeTooSmall { min: usize, got: usize },

    /// Parameter search came up empty.
    #[error("no physical solution for {0}")]
    NoPhysicalSolution(String),

    /// Gauge fidelity is only exact on the single-excitation sector.
    #[error("gauge fidelity is defined on the single-excitation sector only")]
    NotSingleExcitation,

    /// Catch-all for protocol-level contract violations.
    #[error("{0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, Error>;
