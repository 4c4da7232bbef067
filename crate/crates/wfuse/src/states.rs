//! Constructors for the resource states: prototype W states, the W-like
//! class used for perfect teleportation and superdense coding, and single
//! photons.
//!
//! Position convention: qubits are indexed 1..N left to right, and the
//! distinguished qubit of the W-like state (amplitude 1/sqrt(2)) sits at the
//! LAST position. Constructor amplitudes are all positive real; relative
//! phases only ever arise from beam-splitter evolution.

use crate::error::{Error, Result};
use crate::fock::{Amplitude, FockTerm, Polarization, PolarizationState};

/// Specification of a resource state by kind and size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpec {
    /// Prototype (maximally entangled) W state on `size` photons.
    W { size: usize },
    /// W-like state on `size` photons: one amplitude 1/sqrt(2), the rest
    /// 1/sqrt(2(N-1)).
    WLike { size: usize },
    /// A single photon of fixed polarization.
    SinglePhoton { polarization: Polarization },
}

impl StateSpec {
    pub fn size(&self) -> usize {
        match self {
            Self::W { size } | Self::WLike { size } => *size,
            Self::SinglePhoton { .. } => 1,
        }
    }

    pub fn build(&self) -> Result<PolarizationState> {
        match self {
            Self::W { size } => w_state(*size),
            Self::WLike { size } => wlike_state(*size),
            Self::SinglePhoton { polarization } => Ok(single_photon(*polarization)),
        }
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::W { size } => write!(f, "w({size})"),
            Self::WLike { size } => write!(f, "wlike({size})"),
            Self::SinglePhoton { polarization } => write!(f, "photon({polarization})"),
        }
    }
}

fn single_v_term(n: usize, v_at: usize) -> FockTerm {
    let mut qs = vec![Polarization::H; n];
    qs[v_at] = Polarization::V;
    FockTerm::qubits(&qs)
}

/// Prototype W state: the uniform superposition of the n single-V terms.
pub fn w_state(n: usize) -> Result<PolarizationState> {
    if n < 2 {
        return Err(Error::SizeTooSmall { min: 2, got: n });
    }
    let amp = Amplitude::new((n as f64).sqrt().recip(), 0.0);
    let mut state = PolarizationState::empty(n, 0);
    for v_at in 0..n {
        state.add(single_v_term(n, v_at), amp);
    }
    Ok(state)
}

/// W-like state: amplitude 1/sqrt(2) on the term with V at the last
/// position, 1/sqrt(2(n-1)) on each of the others. For n = 2 this is the
/// usual W-type Bell pair.
pub fn wlike_state(n: usize) -> Result<PolarizationState> {
    if n < 2 {
        return Err(Error::SizeTooSmall { min: 2, got: n });
    }
    let distinguished = Amplitude::new(2.0f64.sqrt().recip(), 0.0);
    let rest = Amplitude::new((2.0 * (n as f64 - 1.0)).sqrt().recip(), 0.0);
    let mut state = PolarizationState::empty(n, 0);
    for v_at in 0..n - 1 {
        state.add(single_v_term(n, v_at), rest);
    }
    state.add(single_v_term(n, n - 1), distinguished);
    Ok(state)
}

/// One photon of fixed polarization, as a one-qubit state.
pub fn single_photon(p: Polarization) -> PolarizationState {
    PolarizationState::basis(FockTerm::qubits(&[p]))
}
