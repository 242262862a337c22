//! Sparse truncated Fock-space states.
//!
//! States live in a product of single-mode Fock spaces, each truncated to an
//! even dimension `cutoff`, and are stored as maps from occupation
//! multi-indices to complex amplitudes. Only two families of entangled states
//! are built here: the squeezed-coherent state on three modes and the
//! squeezed-squeezed state on four, each a two-branch superposition with a
//! relative phase. Everything is kept sparse: a squeezed pair only populates
//! equal-occupation indices, so an n-mode state costs O(cutoff^2) entries
//! rather than cutoff^n.

use std::collections::BTreeMap;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Occupation-number multi-index; inline storage covers the 3- and 4-mode
/// states used here without allocation.
pub type MultiIndex = SmallVec<[u16; 4]>;

/// Per-branch probability mass allowed beyond the truncation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Amplitudes below this magnitude are dropped from the sparse map.
pub const PRUNE_THRESHOLD: f64 = 1e-16;

/// Below this unnormalized squared norm the superposition is degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Normalization contract on built states: |<psi|psi> - 1| stays under this.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Sparse multimode ket over a truncated Fock basis.
///
/// Invariants: every stored index has exactly `num_modes` entries, each
/// strictly below `cutoff`; `cutoff` is even so operators pairing the
/// occupations (2n, 2n+1) close on the truncated space; amplitudes below
/// [`PRUNE_THRESHOLD`] are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKet {
    num_modes: usize,
    cutoff: usize,
    amplitudes: BTreeMap<MultiIndex, Complex64>,
}

impl SparseKet {
    pub(crate) fn empty(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidArgument("num_modes must be positive".into()));
        }
        check_cutoff(cutoff)?;
        Ok(Self {
            num_modes,
            cutoff,
            amplitudes: BTreeMap::new(),
        })
    }

    pub(crate) fn from_parts(
        num_modes: usize,
        cutoff: usize,
        amplitudes: BTreeMap<MultiIndex, Complex64>,
    ) -> Self {
        Self {
            num_modes,
            cutoff,
            amplitudes,
        }
    }

    /// Basis ket |n_0, ..., n_{k-1}> with unit amplitude.
    pub fn basis(num_modes: usize, cutoff: usize, occupations: &[u16]) -> Result<Self> {
        let mut ket = Self::empty(num_modes, cutoff)?;
        if occupations.len() != num_modes {
            return Err(Error::InvalidArgument(format!(
                "expected {num_modes} occupations, got {}",
                occupations.len()
            )));
        }
        if let Some(&n) = occupations.iter().find(|&&n| n as usize >= cutoff) {
            return Err(Error::InvalidArgument(format!(
                "occupation {n} outside cutoff {cutoff}"
            )));
        }
        ket.insert(MultiIndex::from_slice(occupations), Complex64::new(1.0, 0.0));
        Ok(ket)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of stored (non-pruned) amplitudes.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude at the given occupation index (zero when absent).
    pub fn amplitude(&self, occupations: &[u16]) -> Complex64 {
        self.amplitudes
            .get(occupations)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Stored entries in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn insert(&mut self, index: MultiIndex, amplitude: Complex64) {
        debug_assert_eq!(index.len(), self.num_modes);
        debug_assert!(index.iter().all(|&n| (n as usize) < self.cutoff));
        if amplitude.norm() >= PRUNE_THRESHOLD {
            self.amplitudes.insert(index, amplitude);
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.num_modes != other.num_modes || self.cutoff != other.cutoff {
            return Err(Error::ShapeMismatch {
                modes_a: self.num_modes,
                cutoff_a: self.cutoff,
                modes_b: other.num_modes,
                cutoff_b: other.cutoff,
            });
        }
        Ok(())
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 || cutoff % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff must be even and at least 2, got {cutoff}"
        )));
    }
    if cutoff > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} exceeds the supported occupation range"
        )));
    }
    Ok(())
}

/// <bra|ket> over the shared support. Conjugate-symmetric by construction.
pub fn inner_product(bra: &SparseKet, ket: &SparseKet) -> Result<Complex64> {
    bra.same_shape(ket)?;
    // Both maps iterate in sorted index order; merge-join the supports.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut left = bra.amplitudes.iter().peekable();
    let mut right = ket.amplitudes.iter().peekable();
    while let (Some(&(li, la)), Some(&(ri, ra))) = (left.peek(), right.peek()) {
        match li.cmp(ri) {
            std::cmp::Ordering::Less => {
                left.next();
            }
            std::cmp::Ordering::Greater => {
                right.next();
            }
            std::cmp::Ordering::Equal => {
                acc += la.conj() * ra;
                left.next();
                right.next();
            }
        }
    }
    Ok(acc)
}

/// Tensor product; `a`'s modes come first. Cutoffs must match.
pub fn tensor(a: &SparseKet, b: &SparseKet) -> Result<SparseKet> {
    if a.cutoff != b.cutoff {
        return Err(Error::ShapeMismatch {
            modes_a: a.num_modes,
            cutoff_a: a.cutoff,
            modes_b: b.num_modes,
            cutoff_b: b.cutoff,
        });
    }
    let mut out = SparseKet::empty(a.num_modes + b.num_modes, a.cutoff)?;
    for (ia, va) in a.iter() {
        for (ib, vb) in b.iter() {
            let mut idx = ia.clone();
            idx.extend_from_slice(ib);
            out.insert(idx, va * vb);
        }
    }
    Ok(out)
}

/// Coherent-state amplitudes c_n = e^{-alpha^2/2} alpha^n / sqrt(n!) for
/// n < cutoff, together with the truncated tail mass 1 - sum c_n^2.
#[derive(Debug, Clone)]
pub struct CoherentAmplitudes {
    pub amplitudes: Vec<f64>,
    pub tail_mass: f64,
}

pub fn coherent_coefficients(alpha: f64, cutoff: usize) -> Result<CoherentAmplitudes> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "must be finite",
        });
    }
    check_cutoff(cutoff)?;
    let mut amplitudes = Vec::with_capacity(cutoff);
    let mut c = (-alpha * alpha / 2.0).exp();
    amplitudes.push(c);
    for n in 1..cutoff {
        c *= alpha / (n as f64).sqrt();
        amplitudes.push(c);
    }
    let mass: f64 = amplitudes.iter().map(|c| c * c).sum();
    Ok(CoherentAmplitudes {
        amplitudes,
        tail_mass: (1.0 - mass).max(0.0),
    })
}

fn check_squeezing(name: &'static str, p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidParameter {
            name,
            value: p,
            requirement: "must lie strictly inside (0, 1)",
        });
    }
    Ok(())
}

fn squeezed_amplitudes(p: f64, cutoff: usize) -> Vec<f64> {
    let head = (1.0 - p * p).sqrt();
    let mut out = Vec::with_capacity(cutoff);
    let mut s = head;
    out.push(s);
    for _ in 1..cutoff {
        s *= p;
        out.push(s);
    }
    out
}

/// Tail mass of a two-mode squeezed state truncated at `cutoff`:
/// sum_{n >= cutoff} (1 - eta^2) eta^{2n} = eta^{2 cutoff}.
pub fn squeezed_tail_mass(eta: f64, cutoff: usize) -> f64 {
    eta.powi(2 * cutoff as i32)
}

/// Two-mode squeezed state sqrt(1 - eta^2) sum_n eta^n |n, n> truncated at
/// `cutoff`, plus its tail mass.
pub fn two_mode_squeezed_ket(eta: f64, cutoff: usize) -> Result<(SparseKet, f64)> {
    check_squeezing("eta", eta)?;
    let mut ket = SparseKet::empty(2, cutoff)?;
    for (n, &s) in squeezed_amplitudes(eta, cutoff).iter().enumerate() {
        let n = n as u16;
        ket.insert(MultiIndex::from_slice(&[n, n]), Complex64::new(s, 0.0));
    }
    Ok((ket, squeezed_tail_mass(eta, cutoff)))
}

/// Single-mode coherent ket truncated at `cutoff`.
pub fn coherent_ket(alpha: f64, cutoff: usize) -> Result<SparseKet> {
    let coeffs = coherent_coefficients(alpha, cutoff)?;
    let mut ket = SparseKet::empty(1, cutoff)?;
    for (n, &c) in coeffs.amplitudes.iter().enumerate() {
        ket.insert(MultiIndex::from_slice(&[n as u16]), Complex64::new(c, 0.0));
    }
    Ok(ket)
}

/// Which two-branch entangled family a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntangledStateKind {
    /// Three modes: squeezed pair (a, b) and coherent mode c, with the roles
    /// of the two parameters swapped between branches.
    SqueezedCoherent,
    /// Four modes: two squeezed pairs (a, b) and (c, d) with swapped
    /// parameters between branches.
    SqueezedSqueezed,
}

/// Parameters of one entangled state: the squeezing parameter `eta`, the
/// second parameter (coherent amplitude `alpha` for SC, squeezing `sigma`
/// for SS) and the relative phase `phi` between the branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledStateSpec {
    pub kind: EntangledStateKind,
    pub eta: f64,
    pub second_param: f64,
    pub phi: f64,
}

impl EntangledStateSpec {
    /// Squeezed-coherent spec. `alpha` doubles as the squeezing parameter of
    /// the second branch's (a, b) pair, so it must stay below 1; negative or
    /// complex coherent amplitudes are not supported.
    pub fn squeezed_coherent(alpha: f64, eta: f64, phi: f64) -> Result<Self> {
        check_squeezing("eta", eta)?;
        if !alpha.is_finite() || alpha < 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                requirement: "must be real with 0 <= alpha < 1",
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                requirement: "must be finite",
            });
        }
        Ok(Self {
            kind: EntangledStateKind::SqueezedCoherent,
            eta,
            second_param: alpha,
            phi,
        })
    }

    /// Squeezed-squeezed spec with squeezing parameters `eta` and `sigma`.
    pub fn squeezed_squeezed(eta: f64, sigma: f64, phi: f64) -> Result<Self> {
        check_squeezing("eta", eta)?;
        check_squeezing("sigma", sigma)?;
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                requirement: "must be finite",
            });
        }
        Ok(Self {
            kind: EntangledStateKind::SqueezedSqueezed,
            eta,
            second_param: sigma,
            phi,
        })
    }

    pub fn num_modes(&self) -> usize {
        match self.kind {
            EntangledStateKind::SqueezedCoherent => 3,
            EntangledStateKind::SqueezedSqueezed => 4,
        }
    }

    /// Overlap <branch_1|branch_2> of the two unit-norm branches. Real for
    /// real parameters; closed geometric/Gaussian forms.
    pub fn branch_overlap(&self) -> f64 {
        let (eta, p2) = (self.eta, self.second_param);
        match self.kind {
            EntangledStateKind::SqueezedCoherent => {
                let squeezed = (1.0 - p2 * p2).sqrt() * (1.0 - eta * eta).sqrt() / (1.0 - p2 * eta);
                let coherent = (-0.5 * (p2 - eta) * (p2 - eta)).exp();
                squeezed * coherent
            }
            EntangledStateKind::SqueezedSqueezed => {
                let r = (1.0 - eta * eta) * (1.0 - p2 * p2);
                r / ((1.0 - eta * p2) * (1.0 - eta * p2))
            }
        }
    }

    /// Squared norm of |branch_1> + e^{i phi} |branch_2> before normalization.
    pub fn unnormalized_norm_sq(&self) -> f64 {
        2.0 * (1.0 + self.phi.cos() * self.branch_overlap())
    }

    /// Normalization constant (N_SC or N_SS); errors when the branches cancel.
    pub fn normalization(&self) -> Result<f64> {
        let norm_sq = self.unnormalized_norm_sq();
        if norm_sq < DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateState {
                norm_sq,
                threshold: DEGENERACY_THRESHOLD,
            });
        }
        Ok(1.0 / norm_sq.sqrt())
    }

    /// Branch-tail budget for this spec: [`TAIL_TOLERANCE`], tightened by
    /// the unnormalized norm² when the branches nearly cancel. Dividing by a
    /// small norm² amplifies whatever the truncation dropped, so keeping the
    /// *normalized* state inside its norm and oracle contracts requires the
    /// raw branch tails to shrink proportionally. The degeneracy threshold
    /// floors the budget; below it construction fails outright anyway.
    pub fn tail_target(&self) -> f64 {
        TAIL_TOLERANCE
            * self
                .unnormalized_norm_sq()
                .clamp(DEGENERACY_THRESHOLD, 1.0)
    }

    /// Smallest even cutoff keeping every single-branch tail mass below
    /// [`tail_target`](Self::tail_target). Grows like log(target) / log(p)
    /// in the largest squeezing parameter, e.g. about 272 at p = 0.95, so
    /// oracle cost rises steeply toward p -> 1; sparsity keeps states at
    /// O(cutoff^2) entries.
    pub fn adaptive_cutoff(&self) -> usize {
        let target = self.tail_target();
        let mut cutoff = squeezed_adaptive_cutoff(self.eta, target);
        match self.kind {
            EntangledStateKind::SqueezedCoherent => {
                if self.second_param > 0.0 {
                    cutoff = cutoff.max(squeezed_adaptive_cutoff(self.second_param, target));
                }
                cutoff = cutoff.max(coherent_adaptive_cutoff(self.second_param, target));
                cutoff = cutoff.max(coherent_adaptive_cutoff(self.eta, target));
            }
            EntangledStateKind::SqueezedSqueezed => {
                cutoff = cutoff.max(squeezed_adaptive_cutoff(self.second_param, target));
            }
        }
        cutoff
    }

    /// Largest single-branch tail mass at the given cutoff.
    pub fn max_branch_tail(&self, cutoff: usize) -> f64 {
        let mut tail = squeezed_tail_mass(self.eta, cutoff);
        match self.kind {
            EntangledStateKind::SqueezedCoherent => {
                tail = tail.max(squeezed_tail_mass(self.second_param, cutoff));
                tail = tail.max(coherent_tail_mass(self.second_param, cutoff));
                tail = tail.max(coherent_tail_mass(self.eta, cutoff));
            }
            EntangledStateKind::SqueezedSqueezed => {
                tail = tail.max(squeezed_tail_mass(self.second_param, cutoff));
            }
        }
        tail
    }
}

fn squeezed_adaptive_cutoff(p: f64, target: f64) -> usize {
    // smallest even N with p^(2N) < target; the log-based guess is nudged
    // with the exact predicate so boundary rounding cannot bias it
    let guess = (target.ln() / (2.0 * p.ln())).ceil().max(2.0) as usize;
    let mut n = (guess + 1) / 2 * 2;
    while n > 2 && squeezed_tail_mass(p, n - 2) < target {
        n -= 2;
    }
    while squeezed_tail_mass(p, n) >= target {
        n += 2;
    }
    n
}

fn coherent_tail_mass(alpha: f64, cutoff: usize) -> f64 {
    // sum_{k >= cutoff} e^{-mu} mu^k / k!  with mu = alpha^2, summed
    // directly: the complement form 1 - head cannot resolve tails below
    // machine epsilon, and near-degenerate tail budgets go far lower.
    // mu < 1, so terms shrink by at least mu each step and the loop ends.
    let mu = alpha * alpha;
    let mut term = (-mu).exp();
    for k in 0..cutoff {
        term *= mu / (k + 1) as f64;
    }
    let mut sum = 0.0;
    let mut k = cutoff;
    while term > (sum + 1e-300) * 1e-22 {
        sum += term;
        k += 1;
        term *= mu / k as f64;
    }
    sum
}

fn coherent_adaptive_cutoff(alpha: f64, target: f64) -> usize {
    let mut cutoff = 2;
    while coherent_tail_mass(alpha, cutoff) >= target {
        cutoff += 2;
    }
    cutoff
}

/// Build the normalized entangled state at an explicit even cutoff.
///
/// The analytic normalization constant is used rather than the numeric norm
/// of the truncated vector, so raising the cutoff only appends tail entries
/// and never perturbs existing amplitudes. The cutoff must meet the spec's
/// conditioning-aware tail budget ([`EntangledStateSpec::tail_target`]),
/// which bounds the residual norm defect well inside [`NORM_TOLERANCE`] even
/// when the branches nearly cancel.
pub fn build_entangled_state(spec: &EntangledStateSpec, cutoff: usize) -> Result<SparseKet> {
    check_cutoff(cutoff)?;
    let target = spec.tail_target();
    let tail = spec.max_branch_tail(cutoff);
    if tail >= target {
        return Err(Error::Truncation {
            cutoff,
            tail,
            tolerance: target,
        });
    }
    let norm = spec.normalization()?;
    let phase = Complex64::new(spec.phi.cos(), spec.phi.sin());
    let mut ket = SparseKet::empty(spec.num_modes(), cutoff)?;
    match spec.kind {
        EntangledStateKind::SqueezedCoherent => {
            let s_eta = squeezed_amplitudes(spec.eta, cutoff);
            let s_alpha = squeezed_amplitudes_or_vacuum(spec.second_param, cutoff);
            let c_alpha = coherent_coefficients(spec.second_param, cutoff)?.amplitudes;
            let c_eta = coherent_coefficients(spec.eta, cutoff)?.amplitudes;
            for n in 0..cutoff {
                for k in 0..cutoff {
                    let amp = s_eta[n] * c_alpha[k] + phase * (s_alpha[n] * c_eta[k]);
                    let (n, k) = (n as u16, k as u16);
                    ket.insert(MultiIndex::from_slice(&[n, n, k]), norm * amp);
                }
            }
        }
        EntangledStateKind::SqueezedSqueezed => {
            let s_eta = squeezed_amplitudes(spec.eta, cutoff);
            let s_sigma = squeezed_amplitudes(spec.second_param, cutoff);
            for n in 0..cutoff {
                for m in 0..cutoff {
                    let amp = s_eta[n] * s_sigma[m] + phase * (s_sigma[n] * s_eta[m]);
                    let (n, m) = (n as u16, m as u16);
                    ket.insert(MultiIndex::from_slice(&[n, n, m, m]), norm * amp);
                }
            }
        }
    }
    debug_assert!((ket.norm_sq() - 1.0).abs() < NORM_TOLERANCE);
    Ok(ket)
}

fn squeezed_amplitudes_or_vacuum(p: f64, cutoff: usize) -> Vec<f64> {
    // alpha = 0 degenerates the squeezed pair to the two-mode vacuum
    if p == 0.0 {
        let mut v = vec![0.0; cutoff];
        v[0] = 1.0;
        v
    } else {
        squeezed_amplitudes(p, cutoff)
    }
}

/// Build at the spec's adaptive cutoff.
pub fn build_entangled_state_adaptive(spec: &EntangledStateSpec) -> Result<SparseKet> {
    build_entangled_state(spec, spec.adaptive_cutoff())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coherent_vacuum_is_trivial() {
        let c = coherent_coefficients(0.0, 4).unwrap();
        assert_eq!(c.amplitudes, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.tail_mass, 0.0);
    }

    #[test]
    fn coherent_coefficients_close_to_unit_mass() {
        let c = coherent_coefficients(0.9, 32).unwrap();
        assert_abs_diff_eq!(c.amplitudes[0], (-0.405f64).exp(), epsilon = 1e-15);
        let mass: f64 = c.amplitudes.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(mass + c.tail_mass, 1.0, epsilon = 1e-14);
        assert!(c.tail_mass < 1e-12);
    }

    #[test]
    fn coherent_rejects_bad_input() {
        assert!(coherent_coefficients(f64::NAN, 4).is_err());
        assert!(coherent_coefficients(0.5, 3).is_err());
        assert!(coherent_coefficients(0.5, 0).is_err());
    }

    #[test]
    fn squeezed_ket_amplitudes_are_geometric() {
        let (ket, tail) = two_mode_squeezed_ket(0.5, 4).unwrap();
        assert_eq!(ket.len(), 4);
        let head = 0.75f64.sqrt();
        for n in 0..4u16 {
            let expect = head * 0.5f64.powi(n as i32);
            assert_abs_diff_eq!(ket.amplitude(&[n, n]).re, expect, epsilon = 1e-15);
        }
        assert_eq!(ket.amplitude(&[0, 1]), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(tail, 0.5f64.powi(8), epsilon = 1e-18);
        assert_abs_diff_eq!(ket.norm_sq() + tail, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn squeezing_domain_is_open() {
        for bad in [0.0, 1.0, -0.2, 1.3, f64::NAN] {
            assert!(two_mode_squeezed_ket(bad, 8).is_err());
        }
    }

    #[test]
    fn inner_product_matches_closed_form_overlap_sc() {
        // numeric overlap of the two branches vs the analytic expression
        let (alpha, eta, cutoff) = (0.3, 0.5, 32);
        let b1 = tensor(
            &two_mode_squeezed_ket(eta, cutoff).unwrap().0,
            &coherent_ket(alpha, cutoff).unwrap(),
        )
        .unwrap();
        let b2 = tensor(
            &two_mode_squeezed_ket(alpha, cutoff).unwrap().0,
            &coherent_ket(eta, cutoff).unwrap(),
        )
        .unwrap();
        let numeric = inner_product(&b1, &b2).unwrap();
        let spec = EntangledStateSpec::squeezed_coherent(alpha, eta, 0.0).unwrap();
        assert_abs_diff_eq!(numeric.re, spec.branch_overlap(), epsilon = 1e-12);
        assert_abs_diff_eq!(numeric.im, 0.0, epsilon = 1e-15);
        // frozen value for the squeezed factor alone
        let squeezed_factor = spec.branch_overlap() / (-0.02f64).exp();
        assert_abs_diff_eq!(squeezed_factor, 0.9719242142269592, epsilon = 1e-13);
    }

    #[test]
    fn inner_product_matches_closed_form_overlap_ss() {
        let (eta, sigma, cutoff) = (0.4, 0.41, 64);
        let b1 = tensor(
            &two_mode_squeezed_ket(eta, cutoff).unwrap().0,
            &two_mode_squeezed_ket(sigma, cutoff).unwrap().0,
        )
        .unwrap();
        let b2 = tensor(
            &two_mode_squeezed_ket(sigma, cutoff).unwrap().0,
            &two_mode_squeezed_ket(eta, cutoff).unwrap().0,
        )
        .unwrap();
        let numeric = inner_product(&b1, &b2).unwrap();
        let spec = EntangledStateSpec::squeezed_squeezed(eta, sigma, 0.0).unwrap();
        assert_abs_diff_eq!(numeric.re, spec.branch_overlap(), epsilon = 1e-12);
        assert_abs_diff_eq!(spec.branch_overlap(), 0.9998569171951192, epsilon = 1e-13);
    }

    #[test]
    fn built_state_is_normalized_and_matches_hand_amplitude() {
        let spec = EntangledStateSpec::squeezed_coherent(0.3, 0.5, 1.1).unwrap();
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        assert_abs_diff_eq!(ket.norm_sq(), 1.0, epsilon = NORM_TOLERANCE);
        let norm = spec.normalization().unwrap();
        let phase = Complex64::new(1.1f64.cos(), 1.1f64.sin());
        let s_eta0 = (1.0f64 - 0.25).sqrt();
        let s_alpha0 = (1.0f64 - 0.09).sqrt();
        let c_alpha0 = (-0.045f64).exp();
        let c_eta0 = (-0.125f64).exp();
        let expect = norm * (s_eta0 * c_alpha0 + phase * (s_alpha0 * c_eta0));
        let got = ket.amplitude(&[0, 0, 0]);
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn ss_state_is_normalized() {
        let spec = EntangledStateSpec::squeezed_squeezed(0.6, 0.35, std::f64::consts::PI).unwrap();
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        assert_abs_diff_eq!(ket.norm_sq(), 1.0, epsilon = NORM_TOLERANCE);
        assert_eq!(ket.num_modes(), 4);
    }

    #[test]
    fn degenerate_superposition_is_rejected() {
        let spec =
            EntangledStateSpec::squeezed_coherent(0.4, 0.4, std::f64::consts::PI).unwrap();
        match spec.normalization() {
            Err(Error::DegenerateState { norm_sq, .. }) => assert!(norm_sq < 1e-12),
            other => panic!("expected degenerate-state error, got {other:?}"),
        }
        assert!(build_entangled_state(&spec, 32).is_err());
    }

    #[test]
    fn insufficient_cutoff_is_reported() {
        let spec = EntangledStateSpec::squeezed_squeezed(0.9, 0.3, 0.0).unwrap();
        match build_entangled_state(&spec, 2) {
            Err(Error::Truncation { cutoff, tail, .. }) => {
                assert_eq!(cutoff, 2);
                assert!(tail > 0.5);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_cutoff_is_minimal_even() {
        let spec = EntangledStateSpec::squeezed_coherent(0.3, 0.5, 0.0).unwrap();
        // phi = 0: branches reinforce, so the budget is the plain tolerance
        assert_eq!(spec.tail_target(), TAIL_TOLERANCE);
        let n = spec.adaptive_cutoff();
        assert_eq!(n % 2, 0);
        assert!(spec.max_branch_tail(n) < TAIL_TOLERANCE);
        assert!(spec.max_branch_tail(n - 2) >= TAIL_TOLERANCE);
        // eta = 0.5 dominates: 0.5^(2 * 20) < 1e-12 <= 0.5^(2 * 18)
        assert_eq!(n, 20);
    }

    #[test]
    fn near_degenerate_state_keeps_its_norm() {
        // phi = pi with close parameters: the unnormalized norm² is ~2.4e-4,
        // so the tail budget tightens and the cutoff grows accordingly
        let spec =
            EntangledStateSpec::squeezed_coherent(0.4, 0.41, std::f64::consts::PI).unwrap();
        assert!(spec.tail_target() < TAIL_TOLERANCE / 1e3);
        let relaxed = EntangledStateSpec::squeezed_coherent(0.4, 0.41, 0.0).unwrap();
        assert!(spec.adaptive_cutoff() > relaxed.adaptive_cutoff());
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        assert!((ket.norm_sq() - 1.0).abs() < 1e-10);
        // the cutoff that suffices at phi = 0 is insufficient here
        assert!(matches!(
            build_entangled_state(&spec, relaxed.adaptive_cutoff()),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn raising_cutoff_only_appends_entries() {
        let spec = EntangledStateSpec::squeezed_squeezed(0.55, 0.3, 2.0).unwrap();
        let low = build_entangled_state_adaptive(&spec).unwrap();
        let high = build_entangled_state(&spec, low.cutoff() + 8).unwrap();
        for (idx, amp) in low.iter() {
            assert_eq!(high.amplitude(idx), *amp);
        }
        assert!(high.len() >= low.len());
    }

    #[test]
    fn basis_kets_are_orthonormal() {
        let e0 = SparseKet::basis(2, 4, &[0, 1]).unwrap();
        let e1 = SparseKet::basis(2, 4, &[1, 0]).unwrap();
        assert_eq!(inner_product(&e0, &e0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(inner_product(&e0, &e1).unwrap(), Complex64::new(0.0, 0.0));
        assert!(SparseKet::basis(2, 4, &[4, 0]).is_err());
        assert!(SparseKet::basis(2, 4, &[0]).is_err());
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let a = SparseKet::basis(2, 4, &[0, 0]).unwrap();
        let b = SparseKet::basis(2, 6, &[0, 0]).unwrap();
        let c = SparseKet::basis(3, 4, &[0, 0, 0]).unwrap();
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(inner_product(&a, &c).is_err());
    }
}
