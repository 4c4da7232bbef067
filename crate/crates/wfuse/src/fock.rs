//! Sparse substrate for polarization-encoded photonic states.
//!
//! A state is a complex-weighted superposition of [`FockTerm`]s. Each term
//! couples a string of spectator qubits (photons parked at their sites, one
//! polarization each) with a list of active spatial modes carrying `(n_H, n_V)`
//! photon occupations. Terms live in a sorted map, so two states built from
//! the same terms in any insertion order compare equal.
//!
//! Sub-normalized states are first class: a projection keeps its squared norm
//! (the branch probability), and renormalization is always an explicit step.
//! Every operation is a pure function over immutable values.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex probability amplitude.
pub type Amplitude = Complex64;

/// Photon polarization. The derived order `H < V` fixes the canonical term
/// ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Self::H => Self::V,
            Self::V => Self::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::H => write!(f, "H"),
            Self::V => write!(f, "V"),
        }
    }
}

/// Photon occupation of one spatial mode, split by polarization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeOcc {
    pub h: u8,
    pub v: u8,
}

impl ModeOcc {
    pub const VACUUM: ModeOcc = ModeOcc { h: 0, v: 0 };

    pub fn new(h: u8, v: u8) -> Self {
        Self { h, v }
    }

    pub fn of(p: Polarization) -> Self {
        match p {
            Polarization::H => Self::new(1, 0),
            Polarization::V => Self::new(0, 1),
        }
    }

    pub fn total(self) -> u8 {
        self.h + self.v
    }

    pub fn is_vacuum(self) -> bool {
        self.total() == 0
    }

    /// The polarization of the mode's photon, if it holds exactly one.
    pub fn single(self) -> Option<Polarization> {
        match (self.h, self.v) {
            (1, 0) => Some(Polarization::H),
            (0, 1) => Some(Polarization::V),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        Self { h: self.v, v: self.h }
    }
}

impl fmt::Display for ModeOcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "0");
        }
        for _ in 0..self.h {
            write!(f, "H")?;
        }
        for _ in 0..self.v {
            write!(f, "V")?;
        }
        Ok(())
    }
}

/// One basis term: spectator polarizations plus per-mode occupations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockTerm {
    spectators: Vec<Polarization>,
    modes: Vec<ModeOcc>,
}

impl FockTerm {
    pub fn new(spectators: Vec<Polarization>, modes: Vec<ModeOcc>) -> Self {
        Self { spectators, modes }
    }

    /// A term with spectator qubits only, no active modes.
    pub fn qubits(spectators: &[Polarization]) -> Self {
        Self::new(spectators.to_vec(), Vec::new())
    }

    pub fn spectators(&self) -> &[Polarization] {
        &self.spectators
    }

    pub fn modes(&self) -> &[ModeOcc] {
        &self.modes
    }

    /// Total photon number carried by the term.
    pub fn photon_count(&self) -> u32 {
        self.spectators.len() as u32
            + self.modes.iter().map(|m| m.total() as u32).sum::<u32>()
    }

    /// Number of V-polarized photons (spectators and modes).
    pub fn v_count(&self) -> u32 {
        self.spectators
            .iter()
            .filter(|p| **p == Polarization::V)
            .count() as u32
            + self.modes.iter().map(|m| m.v as u32).sum::<u32>()
    }

    fn flipped(&self) -> Self {
        Self {
            spectators: self.spectators.iter().map(|p| p.flipped()).collect(),
            modes: self.modes.iter().map(|m| m.flipped()).collect(),
        }
    }
}

impl fmt::Display for FockTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for p in &self.spectators {
            write!(f, "{p}")?;
        }
        for (i, m) in self.modes.iter().enumerate() {
            if i > 0 || !self.spectators.is_empty() {
                write!(f, ";")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ">")
    }
}

/// Sparse superposition over [`FockTerm`]s with a fixed arity.
///
/// All terms share the same spectator count and mode count; zero-amplitude
/// terms are absent. Equality is structural on the sorted term map.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationState {
    spectator_len: usize,
    mode_len: usize,
    terms: BTreeMap<FockTerm, Amplitude>,
}

impl PolarizationState {
    /// Empty (zero) state of the given arity.
    pub fn empty(spectator_len: usize, mode_len: usize) -> Self {
        Self {
            spectator_len,
            mode_len,
            terms: BTreeMap::new(),
        }
    }

    /// Single-term state with amplitude 1.
    pub fn basis(term: FockTerm) -> Self {
        let mut state = Self::empty(term.spectators.len(), term.modes.len());
        state.add(term, Amplitude::new(1.0, 0.0));
        state
    }

    /// One empty spatial mode with amplitude 1 (identity under tensoring up
    /// to the extra mode slot).
    pub fn vacuum_mode() -> Self {
        Self::basis(FockTerm::new(Vec::new(), vec![ModeOcc::VACUUM]))
    }

    /// Builds a state from `(term, amplitude)` pairs, accumulating duplicates.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockTerm, Amplitude)>,
    {
        let mut iter = terms.into_iter();
        let (first, amp) = match iter.next() {
            Some(pair) => pair,
            None => return Err(Error::EmptyBranch),
        };
        let mut state = Self::empty(first.spectators.len(), first.modes.len());
        state.add(first, amp);
        for (term, amp) in iter {
            state.try_add(term, amp)?;
        }
        Ok(state)
    }

    pub fn spectator_len(&self) -> usize {
        self.spectator_len
    }

    pub fn mode_len(&self) -> usize {
        self.mode_len
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockTerm, &Amplitude)> {
        self.terms.iter()
    }

    /// Amplitude of `term`, zero if absent.
    pub fn amplitude(&self, term: &FockTerm) -> Amplitude {
        self.terms
            .get(term)
            .copied()
            .unwrap_or_else(|| Amplitude::new(0.0, 0.0))
    }

    /// Accumulates `amp` onto `term`, pruning exact zeros.
    ///
    /// Panics on arity mismatch; use [`Self::try_add`] for fallible inserts.
    pub fn add(&mut self, term: FockTerm, amp: Amplitude) {
        assert_eq!(term.spectators.len(), self.spectator_len, "spectator arity");
        assert_eq!(term.modes.len(), self.mode_len, "mode arity");
        use std::collections::btree_map::Entry;
        match self.terms.entry(term) {
            Entry::Vacant(slot) => {
                if !(amp.re == 0.0 && amp.im == 0.0) {
                    slot.insert(amp);
                }
            }
            Entry::Occupied(mut slot) => {
                let sum = *slot.get() + amp;
                if sum.re == 0.0 && sum.im == 0.0 {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn try_add(&mut self, term: FockTerm, amp: Amplitude) -> Result<()> {
        if term.spectators.len() != self.spectator_len || term.modes.len() != self.mode_len {
            return Err(Error::ArityMismatch(format!(
                "term has {} spectators / {} modes, state has {} / {}",
                term.spectators.len(),
                term.modes.len(),
                self.spectator_len,
                self.mode_len
            )));
        }
        self.add(term, amp);
        Ok(())
    }

    /// Squared norm, the total probability weight of the state.
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the unit-norm state and the squared norm of the input.
    ///
    /// The squared norm is the branch probability when the input is a
    /// projected (sub-normalized) state.
    pub fn normalized(&self) -> Result<(Self, f64)> {
        let norm_sq = self.norm_sq();
        if self.terms.is_empty() || norm_sq <= 0.0 {
            return Err(Error::EmptyBranch);
        }
        let scale = norm_sq.sqrt().recip();
        let mut out = self.clone();
        for amp in out.terms.values_mut() {
            *amp *= scale;
        }
        Ok((out, norm_sq))
    }

    pub fn scaled(&self, factor: Amplitude) -> Self {
        let mut out = self.clone();
        if factor.re == 0.0 && factor.im == 0.0 {
            out.terms.clear();
            return out;
        }
        for amp in out.terms.values_mut() {
            *amp *= factor;
        }
        out
    }

    /// Conjugate-bilinear inner product `<self|other>`.
    pub fn inner_product(&self, other: &Self) -> Result<Amplitude> {
        if self.spectator_len != other.spectator_len || self.mode_len != other.mode_len {
            return Err(Error::ArityMismatch(format!(
                "{}x{} vs {}x{}",
                self.spectator_len, self.mode_len, other.spectator_len, other.mode_len
            )));
        }
        let mut acc = Amplitude::new(0.0, 0.0);
        // Iterate the smaller map.
        let (small, big, conj_small) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, true)
        } else {
            (&other.terms, &self.terms, false)
        };
        for (term, amp) in small {
            if let Some(other_amp) = big.get(term) {
                acc += if conj_small {
                    amp.conj() * other_amp
                } else {
                    other_amp.conj() * amp
                };
            }
        }
        Ok(acc)
    }

    /// Tensor product: spectator lists and mode lists concatenate, term
    /// counts and norms multiply.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::empty(
            self.spectator_len + other.spectator_len,
            self.mode_len + other.mode_len,
        );
        for (lt, la) in &self.terms {
            for (rt, ra) in &other.terms {
                let mut spectators = lt.spectators.clone();
                spectators.extend_from_slice(&rt.spectators);
                let mut modes = lt.modes.clone();
                modes.extend_from_slice(&rt.modes);
                out.add(FockTerm::new(spectators, modes), la * ra);
            }
        }
        out
    }

    /// Keeps exactly the terms matching `pred`; the result is sub-normalized.
    pub fn filter_terms<F>(&self, pred: F) -> Self
    where
        F: Fn(&FockTerm) -> bool,
    {
        let mut out = Self::empty(self.spectator_len, self.mode_len);
        for (term, amp) in &self.terms {
            if pred(term) {
                out.add(term.clone(), *amp);
            }
        }
        out
    }

    /// Moves the spectator qubit at `idx` into a fresh single-photon mode
    /// appended after the existing modes.
    pub fn qubit_to_mode(&self, idx: usize) -> Result<Self> {
        if idx >= self.spectator_len {
            return Err(Error::BadQubitIndex(idx));
        }
        let mut out = Self::empty(self.spectator_len - 1, self.mode_len + 1);
        for (term, amp) in &self.terms {
            let mut spectators = term.spectators.clone();
            let p = spectators.remove(idx);
            let mut modes = term.modes.clone();
            modes.push(ModeOcc::of(p));
            out.add(FockTerm::new(spectators, modes), *amp);
        }
        Ok(out)
    }

    /// Converts a singly-occupied mode back into a spectator qubit appended
    /// at the last position. Errors if any term holds other than exactly one
    /// photon in the mode.
    pub fn mode_to_qubit(&self, mode_idx: usize) -> Result<Self> {
        if mode_idx >= self.mode_len {
            return Err(Error::BadModeIndex(mode_idx));
        }
        let mut out = Self::empty(self.spectator_len + 1, self.mode_len - 1);
        for (term, amp) in &self.terms {
            let p = term.modes[mode_idx]
                .single()
                .ok_or(Error::ModeNotAQubit(mode_idx))?;
            let mut spectators = term.spectators.clone();
            spectators.push(p);
            let mut modes = term.modes.clone();
            modes.remove(mode_idx);
            out.add(FockTerm::new(spectators, modes), *amp);
        }
        Ok(out)
    }

    /// Removes a mode that is vacuum in every term.
    pub fn drop_vacuum_mode(&self, mode_idx: usize) -> Result<Self> {
        if mode_idx >= self.mode_len {
            return Err(Error::BadModeIndex(mode_idx));
        }
        let mut out = Self::empty(self.spectator_len, self.mode_len - 1);
        for (term, amp) in &self.terms {
            if !term.modes[mode_idx].is_vacuum() {
                return Err(Error::ModeNotVacuum(mode_idx));
            }
            let mut modes = term.modes.clone();
            modes.remove(mode_idx);
            out.add(FockTerm::new(term.spectators.clone(), modes), *amp);
        }
        Ok(out)
    }

    /// Swaps H and V everywhere (a global polarization relabeling).
    pub fn flip_polarizations(&self) -> Self {
        let mut out = Self::empty(self.spectator_len, self.mode_len);
        for (term, amp) in &self.terms {
            out.add(term.flipped(), *amp);
        }
        out
    }

    /// Term-wise approximate equality with absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.spectator_len != other.spectator_len || self.mode_len != other.mode_len {
            return false;
        }
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .all(|k| (self.amplitude(k) - other.amplitude(k)).norm() <= tol)
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (term, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if amp.im == 0.0 {
                write!(f, "({:+.4})", amp.re)?;
            } else {
                write!(f, "({:+.4}{:+.4}i)", amp.re, amp.im)?;
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}
