//! Seeded random generators for property checks.

use num_complex::Complex64;
use rand::Rng;

use crate::fock::{FockTerm, ModeOcc, Polarization, PolarizationState};
use crate::pdbs::PdbsParams;

/// Random transmissivities drawn uniformly from (0.01, 0.99).
pub fn random_params<R: Rng>(rng: &mut R) -> PdbsParams {
    PdbsParams::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99))
        .expect("range keeps parameters valid")
}

/// Random normalized state with the given arity and term count, with mode
/// occupations up to two photons per polarization.
pub fn random_state<R: Rng>(
    rng: &mut R,
    spectator_len: usize,
    mode_len: usize,
    max_terms: usize,
) -> PolarizationState {
    let mut state = PolarizationState::empty(spectator_len, mode_len);
    let terms = rng.gen_range(1..=max_terms.max(1));
    for _ in 0..terms {
        let spectators: Vec<Polarization> = (0..spectator_len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Polarization::H
                } else {
                    Polarization::V
                }
            })
            .collect();
        let modes: Vec<ModeOcc> = (0..mode_len)
            .map(|_| ModeOcc::new(rng.gen_range(0..=2), rng.gen_range(0..=2)))
            .collect();
        let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        state.add(FockTerm::new(spectators, modes), amp);
    }
    if state.is_empty() {
        // All draws cancelled; fall back to a deterministic basis term.
        state.add(
            FockTerm::new(
                vec![Polarization::H; spectator_len],
                vec![ModeOcc::of(Polarization::H); mode_len],
            ),
            Complex64::new(1.0, 0.0),
        );
    }
    state
        .normalized()
        .expect("state has at least one nonzero term")
        .0
}
