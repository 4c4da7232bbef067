//! The optical elements: the polarization-dependent beam splitter (PDBS),
//! the polarizing-beam-splitter detection stage, and post-selection.
//!
//! # Mode convention
//!
//! The PDBS transmits H photons with probability `mu` and V photons with
//! probability `nu`. Writing `t_H = mu`, `t_V = nu`, the creation operators
//! of the two input modes rewrite as
//!
//! ```text
//! a+_P -> sqrt(t_P) c+_P + sqrt(1 - t_P) d+_P
//! b+_P -> -sqrt(1 - t_P) c+_P + sqrt(t_P) d+_P
//! ```
//!
//! i.e. input `a` transmits toward output `c`, input `b` toward output `d`,
//! and the reflection from `b` into `c` carries the minus sign. This is the
//! unique homomorphic extension (up to global relabeling) that reproduces
//! the printed two-photon transformation table, and it is fixed project-wide:
//! [`two_photon_reference`] is an independent transcription of that table
//! against which [`apply_pdbs`] is checked. Double occupations pick up the
//! usual bosonic sqrt(2).
//!
//! Detectors are ideal (unit efficiency, photon-number resolving): the scheme
//! is lossless post-selection, so branch probabilities over a complete
//! pattern set sum to one.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockTerm, ModeOcc, Polarization, PolarizationState};

/// The pair of PDBS transmissivities, valid strictly inside (0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdbsParams {
    mu: f64,
    nu: f64,
}

impl PdbsParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(in_open_unit(mu) && in_open_unit(nu)) {
            return Err(Error::InvalidTransmissivity { mu, nu });
        }
        Ok(Self { mu, nu })
    }

    /// Transmissivity for H-polarized photons.
    pub fn mu(self) -> f64 {
        self.mu
    }

    /// Transmissivity for V-polarized photons.
    pub fn nu(self) -> f64 {
        self.nu
    }

    fn t(self, p: Polarization) -> f64 {
        match p {
            Polarization::H => self.mu,
            Polarization::V => self.nu,
        }
    }
}

fn in_open_unit(x: f64) -> bool {
    x.is_finite() && x > 0.0 && x < 1.0
}

// tiny factorials; photon counts here never exceed a handful
fn fact(n: u8) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

fn binom(n: u8, k: u8) -> f64 {
    fact(n) / (fact(k) * fact(n - k))
}

/// Evolves `state` through a PDBS fed by modes `in_a` and `in_b`. The output
/// mode `c` replaces `in_a`'s slot and `d` replaces `in_b`'s; spectators and
/// other modes are untouched. Unitary: the norm is preserved exactly up to
/// rounding.
pub fn apply_pdbs(
    state: &PolarizationState,
    in_a: usize,
    in_b: usize,
    params: PdbsParams,
) -> Result<PolarizationState> {
    if in_a >= state.mode_len() {
        return Err(Error::BadModeIndex(in_a));
    }
    if in_b >= state.mode_len() {
        return Err(Error::BadModeIndex(in_b));
    }
    if in_a == in_b {
        return Err(Error::DegenerateModes(in_a));
    }

    let mut out = PolarizationState::empty(state.spectator_len(), state.mode_len());
    for (term, amp) in state.terms() {
        let occ_a = term.modes()[in_a];
        let occ_b = term.modes()[in_b];
        // |n> = (a+)^n / sqrt(n!) |0>, so strip the input normalization once.
        let prefactor = amp
            / (fact(occ_a.h) * fact(occ_a.v) * fact(occ_b.h) * fact(occ_b.v)).sqrt();

        // Distribute each photon family over (c, d) binomially.
        for (ah_c, w_ah) in split_input_a(occ_a.h, params.t(Polarization::H)) {
            for (bh_c, w_bh) in split_input_b(occ_b.h, params.t(Polarization::H)) {
                for (av_c, w_av) in split_input_a(occ_a.v, params.t(Polarization::V)) {
                    for (bv_c, w_bv) in split_input_b(occ_b.v, params.t(Polarization::V)) {
                        let c = ModeOcc::new(ah_c + bh_c, av_c + bv_c);
                        let d = ModeOcc::new(
                            occ_a.h + occ_b.h - c.h,
                            occ_a.v + occ_b.v - c.v,
                        );
                        let weight = w_ah * w_bh * w_av * w_bv
                            * (fact(c.h) * fact(c.v) * fact(d.h) * fact(d.v)).sqrt();
                        let mut modes = term.modes().to_vec();
                        modes[in_a] = c;
                        modes[in_b] = d;
                        out.add(
                            FockTerm::new(term.spectators().to_vec(), modes),
                            prefactor * weight,
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Terms of (sqrt(t) c+ + sqrt(1-t) d+)^n: for each count `k` sent to `c`,
/// the weight C(n,k) t^(k/2) (1-t)^((n-k)/2).
fn split_input_a(n: u8, t: f64) -> Vec<(u8, f64)> {
    let (s, r) = (t.sqrt(), (1.0 - t).sqrt());
    (0..=n)
        .map(|k| (k, binom(n, k) * s.powi(k as i32) * r.powi((n - k) as i32)))
        .collect()
}

/// Terms of (-sqrt(1-t) c+ + sqrt(t) d+)^n.
fn split_input_b(n: u8, t: f64) -> Vec<(u8, f64)> {
    let (s, r) = (t.sqrt(), (1.0 - t).sqrt());
    (0..=n)
        .map(|k| (k, binom(n, k) * (-r).powi(k as i32) * s.powi((n - k) as i32)))
        .collect()
}

/// The literal two-photon transformation table: for single photons of
/// polarizations `(p_a, p_b)` entering modes a and b, the list of
/// `(occ_c, occ_d, amplitude)` output components.
///
/// Kept deliberately independent of [`apply_pdbs`] (plain transcribed
/// coefficients, no operator algebra) so it can serve as an oracle. The two
/// bunched components of the (V, H) row follow from transmitting/reflecting
/// each photon independently; their coefficient pair is pinned by unitarity
/// against the (H, V) row.
pub fn two_photon_reference(
    p_a: Polarization,
    p_b: Polarization,
    params: PdbsParams,
) -> Vec<(ModeOcc, ModeOcc, f64)> {
    use Polarization::{H, V};
    let (mu, nu) = (params.mu(), params.nu());
    let one = ModeOcc::of;
    let hh = ModeOcc::new(2, 0);
    let vv = ModeOcc::new(0, 2);
    let hv = ModeOcc::new(1, 1);
    let vac = ModeOcc::VACUUM;
    match (p_a, p_b) {
        (H, H) => vec![
            (one(H), one(H), 2.0 * mu - 1.0),
            (vac, hh, (2.0 * mu * (1.0 - mu)).sqrt()),
            (hh, vac, -(2.0 * mu * (1.0 - mu)).sqrt()),
        ],
        (H, V) => vec![
            (one(H), one(V), (mu * nu).sqrt()),
            (one(V), one(H), -((1.0 - mu) * (1.0 - nu)).sqrt()),
            (vac, hv, ((1.0 - mu) * nu).sqrt()),
            (hv, vac, -(mu * (1.0 - nu)).sqrt()),
        ],
        (V, H) => vec![
            (one(V), one(H), (mu * nu).sqrt()),
            (one(H), one(V), -((1.0 - mu) * (1.0 - nu)).sqrt()),
            (vac, hv, (mu * (1.0 - nu)).sqrt()),
            (hv, vac, -((1.0 - mu) * nu).sqrt()),
        ],
        (V, V) => vec![
            (one(V), one(V), 2.0 * nu - 1.0),
            (vac, vv, (2.0 * nu * (1.0 - nu)).sqrt()),
            (vv, vac, -(2.0 * nu * (1.0 - nu)).sqrt()),
        ],
    }
}

/// Photon counts registered by the detector pair of each monitored mode.
/// After the PBS split, H is transmitted and V reflected, so a mode's
/// detection outcome is its `(n_H, n_V)` occupation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DetectionPattern(pub Vec<(usize, ModeOcc)>);

impl DetectionPattern {
    /// Convenience lookup for the counts registered on `mode`.
    pub fn counts_at(&self, mode: usize) -> Option<ModeOcc> {
        self.0
            .iter()
            .find(|(m, _)| *m == mode)
            .map(|(_, occ)| *occ)
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "(none)");
        }
        for (i, (mode, occ)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "m{mode}:{occ}")?;
        }
        Ok(())
    }
}

/// One detection outcome: the pattern, the normalized conditional state on
/// spectators plus kept modes, and the branch probability.
#[derive(Clone, Debug)]
pub struct Branch {
    pub pattern: DetectionPattern,
    pub state: PolarizationState,
    pub probability: f64,
}

/// Measures every mode not listed in `kept` in the photon-number-resolving
/// polarization basis and enumerates the resulting branches. Kept modes stay
/// quantum (their content is not resolved). Probabilities over the complete
/// pattern set sum to the input norm.
pub fn detect(state: &PolarizationState, kept: &[usize]) -> Result<Vec<Branch>> {
    for &k in kept {
        if k >= state.mode_len() {
            return Err(Error::BadModeIndex(k));
        }
    }
    let monitored: Vec<usize> = (0..state.mode_len()).filter(|m| !kept.contains(m)).collect();

    let mut groups: BTreeMap<Vec<ModeOcc>, PolarizationState> = BTreeMap::new();
    for (term, amp) in state.terms() {
        let signature: Vec<ModeOcc> = monitored.iter().map(|&m| term.modes()[m]).collect();
        let reduced_modes: Vec<ModeOcc> = term
            .modes()
            .iter()
            .enumerate()
            .filter(|(m, _)| !monitored.contains(m))
            .map(|(_, occ)| *occ)
            .collect();
        let reduced = FockTerm::new(term.spectators().to_vec(), reduced_modes);
        groups
            .entry(signature)
            .or_insert_with(|| PolarizationState::empty(state.spectator_len(), kept.len()))
            .add(reduced, *amp);
    }

    let mut branches = Vec::with_capacity(groups.len());
    for (signature, projected) in groups {
        let (normalized, probability) = projected.normalized()?;
        let pattern = DetectionPattern(
            monitored.iter().copied().zip(signature).collect(),
        );
        branches.push(Branch {
            pattern,
            state: normalized,
            probability,
        });
    }
    Ok(branches)
}

/// Projects onto the subspace with exactly one photon in each of the two
/// modes; the result is sub-normalized.
pub fn coincidence_project(
    state: &PolarizationState,
    mode_c: usize,
    mode_d: usize,
) -> PolarizationState {
    state.filter_terms(|term| {
        term.modes()[mode_c].total() == 1 && term.modes()[mode_d].total() == 1
    })
}

/// Two single photons as a 2-mode state (helper for feeding the PDBS).
pub fn two_photon_input(p_a: Polarization, p_b: Polarization) -> PolarizationState {
    PolarizationState::basis(FockTerm::new(
        Vec::new(),
        vec![ModeOcc::of(p_a), ModeOcc::of(p_b)],
    ))
}

/// Checks `apply_pdbs` against the literal two-photon table for one input
/// pair, returning the largest amplitude deviation.
pub fn two_photon_deviation(
    p_a: Polarization,
    p_b: Polarization,
    params: PdbsParams,
) -> Result<f64> {
    let evolved = apply_pdbs(&two_photon_input(p_a, p_b), 0, 1, params)?;
    let mut reference = PolarizationState::empty(0, 2);
    for (occ_c, occ_d, amp) in two_photon_reference(p_a, p_b, params) {
        reference.add(
            FockTerm::new(Vec::new(), vec![occ_c, occ_d]),
            Complex64::new(amp, 0.0),
        );
    }
    let mut worst = 0.0f64;
    for (term, amp) in evolved.terms() {
        worst = worst.max((amp - reference.amplitude(term)).norm());
    }
    for (term, amp) in reference.terms() {
        worst = worst.max((amp - evolved.amplitude(term)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::tol;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use Polarization::{H, V};

    fn params(mu: f64, nu: f64) -> PdbsParams {
        PdbsParams::new(mu, nu).unwrap()
    }

    fn term2(c: ModeOcc, d: ModeOcc) -> FockTerm {
        FockTerm::new(Vec::new(), vec![c, d])
    }

    #[test]
    fn rejects_invalid_transmissivities() {
        assert!(PdbsParams::new(0.0, 0.5).is_err());
        assert!(PdbsParams::new(0.5, 1.0).is_err());
        assert!(PdbsParams::new(f64::NAN, 0.5).is_err());
        assert!(PdbsParams::new(0.3, 0.7).is_ok());
    }

    #[test]
    fn hh_input_components() {
        let p = params(0.3, 0.55);
        let out = apply_pdbs(&two_photon_input(H, H), 0, 1, p).unwrap();
        let mu = 0.3;
        let coincident = out.amplitude(&term2(ModeOcc::of(H), ModeOcc::of(H)));
        assert!((coincident.re - (2.0 * mu - 1.0)).abs() < 1e-14);
        let bunched_d = out.amplitude(&term2(ModeOcc::VACUUM, ModeOcc::new(2, 0)));
        assert!((bunched_d.re - (2.0 * mu * (1.0 - mu)).sqrt()).abs() < 1e-14);
        let bunched_c = out.amplitude(&term2(ModeOcc::new(2, 0), ModeOcc::VACUUM));
        assert!((bunched_c.re + (2.0 * mu * (1.0 - mu)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hv_input_components() {
        let (mu, nu) = (0.1283, 0.7726);
        let out = apply_pdbs(&two_photon_input(H, V), 0, 1, params(mu, nu)).unwrap();
        let hv_cd = out.amplitude(&term2(ModeOcc::of(H), ModeOcc::of(V)));
        assert!((hv_cd.re - (mu * nu).sqrt()).abs() < 1e-14);
        let vh_cd = out.amplitude(&term2(ModeOcc::of(V), ModeOcc::of(H)));
        assert!((vh_cd.re + ((1.0 - mu) * (1.0 - nu)).sqrt()).abs() < 1e-14);
        let bunched_d = out.amplitude(&term2(ModeOcc::VACUUM, ModeOcc::new(1, 1)));
        assert!((bunched_d.re - ((1.0 - mu) * nu).sqrt()).abs() < 1e-14);
        let bunched_c = out.amplitude(&term2(ModeOcc::new(1, 1), ModeOcc::VACUUM));
        assert!((bunched_c.re + (mu * (1.0 - nu)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hong_ou_mandel_suppression() {
        let out = apply_pdbs(&two_photon_input(H, H), 0, 1, params(0.5, 0.5)).unwrap();
        let coincident = out.amplitude(&term2(ModeOcc::of(H), ModeOcc::of(H)));
        assert_eq!(coincident.norm(), 0.0);
    }

    #[test]
    fn single_photon_split() {
        let mu = 0.37;
        let input = PolarizationState::basis(FockTerm::new(
            Vec::new(),
            vec![ModeOcc::of(H), ModeOcc::VACUUM],
        ));
        let out = apply_pdbs(&input, 0, 1, params(mu, 0.5)).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-14);
        let through = out.amplitude(&term2(ModeOcc::of(H), ModeOcc::VACUUM));
        assert!((through.re - mu.sqrt()).abs() < 1e-14);
        let reflected = out.amplitude(&term2(ModeOcc::VACUUM, ModeOcc::of(H)));
        assert!((reflected.re - (1.0 - mu).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matches_two_photon_table_on_random_params() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = sampling::random_params(&mut rng);
            for (pa, pb) in [(H, H), (H, V), (V, H), (V, V)] {
                let dev = two_photon_deviation(pa, pb, p).unwrap();
                assert!(dev < tol::ABS, "deviation {dev} at {p:?} for ({pa},{pb})");
            }
        }
    }

    #[test]
    fn equal_transmissivities_lose_polarization_dependence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let t = sampling::random_params(&mut rng).mu();
            let p = params(t, t);
            let hv = apply_pdbs(&two_photon_input(H, V), 0, 1, p).unwrap();
            let vh = apply_pdbs(&two_photon_input(V, H), 0, 1, p).unwrap();
            let a = hv.amplitude(&term2(ModeOcc::of(H), ModeOcc::of(V))).norm();
            let b = vh.amplitude(&term2(ModeOcc::of(V), ModeOcc::of(H))).norm();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn detect_all_patterns_of_bunched_output() {
        let mu = 0.22;
        let out = apply_pdbs(&two_photon_input(H, H), 0, 1, params(mu, 0.4)).unwrap();
        let branches = detect(&out, &[]).unwrap();
        let mut probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        probs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bunch = 2.0 * mu * (1.0 - mu);
        let mut expected = vec![(2.0 * mu - 1.0).powi(2), bunch, bunch];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(probs.len(), 3);
        for (got, want) in probs.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14);
        }
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < tol::ABS);
    }

    #[test]
    fn detect_keeping_every_mode_yields_one_branch() {
        let out = apply_pdbs(&two_photon_input(H, V), 0, 1, params(0.3, 0.8)).unwrap();
        let branches = detect(&out, &[0, 1]).unwrap();
        assert_eq!(branches.len(), 1);
        assert!((branches[0].probability - 1.0).abs() < tol::ABS);
    }

    #[test]
    fn coincidence_projection_delegates_to_filter() {
        let out = apply_pdbs(&two_photon_input(H, V), 0, 1, params(0.3, 0.8)).unwrap();
        let projected = coincidence_project(&out, 0, 1);
        assert_eq!(projected.num_terms(), 2);
        // Projecting twice changes nothing.
        assert_eq!(coincidence_project(&projected, 0, 1), projected);
    }

    proptest! {
        #[test]
        fn unitarity_on_random_states(seed in 0u64..2048) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let state = sampling::random_state(&mut rng, 2, 2, 4);
            let p = sampling::random_params(&mut rng);
            let out = apply_pdbs(&state, 0, 1, p).unwrap();
            prop_assert!((out.norm_sq() - state.norm_sq()).abs() < tol::ABS);
        }

        #[test]
        fn detection_completeness_on_random_states(seed in 0u64..2048, keep_first in any::<bool>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let state = sampling::random_state(&mut rng, 1, 2, 4);
            let (state, _) = state.normalized().unwrap();
            let kept: &[usize] = if keep_first { &[0] } else { &[] };
            let branches = detect(&state, kept).unwrap();
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() < tol::ABS);
        }
    }
}
