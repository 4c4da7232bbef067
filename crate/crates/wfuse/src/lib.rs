//! Simulator and numerical toolkit for growing polarization-encoded W-class
//! photonic states with a polarization-dependent beam splitter (PDBS).
//!
//! The crate evolves multi-photon polarization states through the PDBS,
//! post-selects detection branches, solves the transmissivity constraints
//! that make each fusion or expansion step land on its target state, and
//! accounts for the Bell-pair resource cost of scalable preparation.

pub mod cli;
pub mod cost;
pub mod error;
pub mod fock;
pub mod pdbs;
pub mod protocols;
pub mod report;
pub mod sampling;
pub mod solve;
pub mod states;
pub mod tol;

pub use error::{Error, Result};
pub use fock::{Amplitude, FockTerm, ModeOcc, Polarization, PolarizationState};
pub use pdbs::{apply_pdbs, coincidence_project, detect, Branch, DetectionPattern, PdbsParams};
pub use protocols::{
    bell_from_singles, expand, fuse, gauge_fidelity, BranchClass, FusionRequest,
    ProtocolOutcome, TargetKind,
};

pub use solve::{best_params, solve_cubic, ParamSolution, Scheme};
pub use states::{single_photon, w_state, wlike_state, StateSpec};
