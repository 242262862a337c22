//! Pseudospin operators and dichotomic Bell operators.
//!
//! Two measurement setups are supported. Setup 1 rotates only the {|0>, |1>}
//! block of a mode and leaves occupations >= 2 alone; setup 2 rotates every
//! (2n, 2n+1) pair via the pseudospin operators. Both are Hermitian
//! involutions, so they behave exactly like spin-1/2 measurements with
//! outcomes +-1.
//!
//! Operators are applied to kets as sparse index rewrites — the multimode
//! matrix is never materialized. Single-mode matrices are built (sparsely)
//! only to verify the operator algebra as explicit matrix identities.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::SparseKet;

/// Which Bell-operator family a measurement uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetupKind {
    /// Setup 1: rotate the {|0>, |1>} block, identity on occupations >= 2.
    ZerothBlock,
    /// Setup 2: rotate every (2n, 2n+1) pair (full pseudospin action).
    FullPseudospin,
}

impl SetupKind {
    /// 1-based index as used on the command line.
    pub fn index(self) -> u8 {
        match self {
            SetupKind::ZerothBlock => 1,
            SetupKind::FullPseudospin => 2,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(SetupKind::ZerothBlock),
            2 => Ok(SetupKind::FullPseudospin),
            other => Err(Error::InvalidArgument(format!(
                "setup must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl fmt::Display for SetupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "setup-{}", self.index())
    }
}

/// One party's measurement: which setup, which mode, which angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellOperatorSpec {
    pub setup: SetupKind,
    pub mode_index: usize,
    pub angle: f64,
}

/// Apply a Bell operator to one mode of a sparse ket.
///
/// The action is a bijective index rewrite with unimodular phases, so the
/// output has the same support size and norm as the input. Setup 1 maps
/// |0> -> e^{ia}|1>, |1> -> e^{-ia}|0> and fixes |n>= 2>; setup 2 maps every
/// |2n> -> e^{ia}|2n+1> and |2n+1> -> e^{-ia}|2n>.
pub fn apply_bell_operator(spec: &BellOperatorSpec, ket: &SparseKet) -> Result<SparseKet> {
    if spec.mode_index >= ket.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode index {} out of range for a {}-mode ket",
            spec.mode_index,
            ket.num_modes()
        )));
    }
    if !spec.angle.is_finite() {
        return Err(Error::InvalidParameter {
            name: "angle",
            value: spec.angle,
            requirement: "must be finite",
        });
    }
    let up = Complex64::new(spec.angle.cos(), spec.angle.sin());
    let down = up.conj();
    let mut out = BTreeMap::new();
    for (idx, amp) in ket.iter() {
        let n = idx[spec.mode_index];
        let (partner, factor) = match spec.setup {
            SetupKind::ZerothBlock => match n {
                0 => (1, up),
                1 => (0, down),
                _ => (n, Complex64::new(1.0, 0.0)),
            },
            // even cutoff makes n ^ 1 (2n <-> 2n+1) always in range
            SetupKind::FullPseudospin => {
                if n % 2 == 0 {
                    (n ^ 1, up)
                } else {
                    (n ^ 1, down)
                }
            }
        };
        let mut new_idx = idx.clone();
        new_idx[spec.mode_index] = partner;
        out.insert(new_idx, amp * factor);
    }
    Ok(SparseKet::from_parts(ket.num_modes(), ket.cutoff(), out))
}

/// Sparse complex matrix over a single-mode truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: BTreeMap<(u32, u32), Complex64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim as u32 {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, row: u32, col: u32, value: Complex64) {
        debug_assert!((row as usize) < self.dim && (col as usize) < self.dim);
        if value != Complex64::new(0.0, 0.0) {
            self.entries.insert((row, col), value);
        } else {
            self.entries.remove(&(row, col));
        }
    }

    pub fn get(&self, row: u32, col: u32) -> Complex64 {
        self.entries
            .get(&(row, col))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &Complex64)> {
        self.entries.iter()
    }

    fn check_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions differ: {} vs {}",
                self.dim, rhs.dim
            )));
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = Self::zeros(self.dim);
        for (&(r, k), &v) in &self.entries {
            for (&(_, c), &w) in rhs.entries.range((k, 0)..=(k, u32::MAX)) {
                let cell = out.entries.entry((r, c)).or_insert(Complex64::new(0.0, 0.0));
                *cell += v * w;
            }
        }
        out.entries.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = self.clone();
        for (&key, &v) in &rhs.entries {
            let cell = out.entries.entry(key).or_insert(Complex64::new(0.0, 0.0));
            *cell -= v;
        }
        out.entries.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= factor;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (&(r, c), &v) in &self.entries {
            out.set(c, r, v.conj());
        }
        out
    }

    /// Kronecker product; `self` indexes the slower (leading) factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        let d2 = rhs.dim as u32;
        let mut out = Self::zeros(self.dim * rhs.dim);
        for (&(r1, c1), &v1) in &self.entries {
            for (&(r2, c2), &v2) in &rhs.entries {
                out.set(r1 * d2 + r2, c1 * d2 + c2, v1 * v2);
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim as u32).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude (zero for the empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Pseudospin component label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PseudospinComponent {
    Sx,
    Sy,
    Sz,
}

/// One pseudospin operator materialized over a truncated single-mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudospinMatrix {
    pub component: PseudospinComponent,
    pub cutoff: usize,
    pub entries: SparseMatrix,
}

fn check_even_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 || cutoff % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff must be even and at least 2, got {cutoff}"
        )));
    }
    Ok(())
}

/// Pseudospin operator on pairs (2n, 2n+1):
/// s_x = sum(|2n+1><2n| + |2n><2n+1|),
/// s_y = i sum(|2n><2n+1| - |2n+1><2n|),
/// s_z = sum(|2n+1><2n+1| - |2n><2n|).
pub fn pseudospin(component: PseudospinComponent, cutoff: usize) -> Result<PseudospinMatrix> {
    check_even_cutoff(cutoff)?;
    let mut m = SparseMatrix::zeros(cutoff);
    let (one, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    for n in 0..(cutoff as u32) / 2 {
        let (even, odd) = (2 * n, 2 * n + 1);
        match component {
            PseudospinComponent::Sx => {
                m.set(odd, even, one);
                m.set(even, odd, one);
            }
            PseudospinComponent::Sy => {
                m.set(even, odd, i);
                m.set(odd, even, -i);
            }
            PseudospinComponent::Sz => {
                m.set(odd, odd, one);
                m.set(even, even, -one);
            }
        }
    }
    Ok(PseudospinMatrix {
        component,
        cutoff,
        entries: m,
    })
}

/// Single-mode matrix of the Bell operator A(a) = (cos a) s_x - (sin a) s_y,
/// restricted to the zeroth block (plus identity) for setup 1. The entries
/// are written directly: e^{+ia} on even -> odd transitions.
pub fn bell_matrix(setup: SetupKind, angle: f64, cutoff: usize) -> Result<SparseMatrix> {
    check_even_cutoff(cutoff)?;
    if !angle.is_finite() {
        return Err(Error::InvalidParameter {
            name: "angle",
            value: angle,
            requirement: "must be finite",
        });
    }
    let up = Complex64::new(angle.cos(), angle.sin());
    let mut m = SparseMatrix::zeros(cutoff);
    match setup {
        SetupKind::ZerothBlock => {
            m.set(1, 0, up);
            m.set(0, 1, up.conj());
            for n in 2..cutoff as u32 {
                m.set(n, n, Complex64::new(1.0, 0.0));
            }
        }
        SetupKind::FullPseudospin => {
            for n in 0..(cutoff as u32) / 2 {
                m.set(2 * n + 1, 2 * n, up);
                m.set(2 * n, 2 * n + 1, up.conj());
            }
        }
    }
    Ok(m)
}

/// Worst-case deviations of the Bell-operator algebra at a given cutoff.
#[derive(Debug, Clone, Copy)]
pub struct AlgebraReport {
    pub setup: SetupKind,
    pub cutoff: usize,
    /// max |A - A^dagger| over the sampled angles
    pub hermiticity: f64,
    /// max |A^2 - 1| over the sampled angles
    pub involution: f64,
    /// max |[A_i, A_j]| over distinct-mode operator pairs
    pub commutation: f64,
}

impl AlgebraReport {
    pub fn max_deviation(&self) -> f64 {
        self.hermiticity.max(self.involution).max(self.commutation)
    }
}

/// Check A^2 = 1, A = A^dagger and cross-mode commutativity as explicit
/// sparse-matrix identities at the given cutoff, over the sampled angles.
/// Needs at least two angles so a nontrivial operator pair exists.
pub fn verify_operator_algebra(
    setup: SetupKind,
    cutoff: usize,
    angle_samples: &[f64],
) -> Result<AlgebraReport> {
    check_even_cutoff(cutoff)?;
    if angle_samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two angle samples".into(),
        ));
    }
    let identity = SparseMatrix::identity(cutoff);
    let mut hermiticity = 0.0f64;
    let mut involution = 0.0f64;
    for &angle in angle_samples {
        let a = bell_matrix(setup, angle, cutoff)?;
        hermiticity = hermiticity.max(a.sub(&a.adjoint())?.max_abs());
        involution = involution.max(a.mul(&a)?.sub(&identity)?.max_abs());
    }
    // Operators on distinct modes: A(a) (x) 1 and 1 (x) A(b) on a two-mode
    // space. Structurally commuting, but checked as actual matrices.
    let mut commutation = 0.0f64;
    for pair in angle_samples.windows(2) {
        let a = bell_matrix(setup, pair[0], cutoff)?.kron(&identity);
        let b = identity.kron(&bell_matrix(setup, pair[1], cutoff)?);
        commutation = commutation.max(a.commutator(&b)?.max_abs());
    }
    Ok(AlgebraReport {
        setup,
        cutoff,
        hermiticity,
        involution,
        commutation,
    })
}

/// Max deviation of the pseudospin relations [s_x, s_y] = 2i s_z (cyclic)
/// and of Hermiticity/involution of each component, at the given cutoff.
pub fn verify_pseudospin_algebra(cutoff: usize) -> Result<f64> {
    let sx = pseudospin(PseudospinComponent::Sx, cutoff)?.entries;
    let sy = pseudospin(PseudospinComponent::Sy, cutoff)?.entries;
    let sz = pseudospin(PseudospinComponent::Sz, cutoff)?.entries;
    let two_i = Complex64::new(0.0, 2.0);
    let identity = SparseMatrix::identity(cutoff);
    let mut dev = 0.0f64;
    for (a, b, c) in [(&sx, &sy, &sz), (&sy, &sz, &sx), (&sz, &sx, &sy)] {
        dev = dev.max(a.commutator(b)?.sub(&c.scale(two_i))?.max_abs());
        dev = dev.max(a.sub(&a.adjoint())?.max_abs());
        dev = dev.max(a.mul(a)?.sub(&identity)?.max_abs());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{inner_product, EntangledStateSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn pseudospin_sx_at_cutoff_two_is_pauli_x() {
        let sx = pseudospin(PseudospinComponent::Sx, 2).unwrap();
        assert_eq!(sx.entries.get(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(sx.entries.get(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(sx.entries.get(0, 0), Complex64::new(0.0, 0.0));
        assert_eq!(sx.entries.entries().count(), 2);
    }

    #[test]
    fn pseudospin_commutation_relations_are_exact() {
        for cutoff in [2, 4, 8, 16] {
            assert_eq!(verify_pseudospin_algebra(cutoff).unwrap(), 0.0);
        }
        assert!(pseudospin(PseudospinComponent::Sy, 5).is_err());
    }

    #[test]
    fn bell_matrix_matches_pseudospin_combination() {
        // A = (cos a) s_x - (sin a) s_y, as a matrix identity
        let (angle, cutoff) = (0.7, 8);
        let a = bell_matrix(SetupKind::FullPseudospin, angle, cutoff).unwrap();
        let sx = pseudospin(PseudospinComponent::Sx, cutoff).unwrap().entries;
        let sy = pseudospin(PseudospinComponent::Sy, cutoff).unwrap().entries;
        let combo = sx
            .scale(Complex64::new(angle.cos(), 0.0))
            .sub(&sy.scale(Complex64::new(angle.sin(), 0.0)))
            .unwrap();
        assert!(a.sub(&combo).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn operator_algebra_holds_at_cutoff_eight() {
        let angles = [0.0, FRAC_PI_4, FRAC_PI_2, -FRAC_PI_4, 1.0, PI / 3.0];
        for setup in [SetupKind::ZerothBlock, SetupKind::FullPseudospin] {
            let report = verify_operator_algebra(setup, 8, &angles).unwrap();
            assert!(report.max_deviation() < 1e-14, "{report:?}");
            assert_eq!(report.hermiticity, 0.0);
        }
    }

    #[test]
    fn trace_distinguishes_the_setups() {
        // setup 2 is traceless; setup 1 contributes 1 per occupation >= 2
        let cutoff = 10;
        let t2 = bell_matrix(SetupKind::FullPseudospin, 0.3, cutoff)
            .unwrap()
            .trace();
        assert_eq!(t2, Complex64::new(0.0, 0.0));
        let t1 = bell_matrix(SetupKind::ZerothBlock, 0.3, cutoff)
            .unwrap()
            .trace();
        assert_eq!(t1, Complex64::new((cutoff - 2) as f64, 0.0));
    }

    #[test]
    fn setup_two_spectrum_is_plus_minus_one() {
        // A Hermitian with A^2 = 1 has eigenvalues +-1; tracelessness fixes
        // the multiplicities at cutoff/2 each. Check the two matrix facts
        // the argument rests on, plus tracelessness, at several angles.
        let cutoff = 12;
        let identity = SparseMatrix::identity(cutoff);
        for angle in [0.0, 0.4, -1.3, FRAC_PI_2] {
            let a = bell_matrix(SetupKind::FullPseudospin, angle, cutoff).unwrap();
            assert!(a.sub(&a.adjoint()).unwrap().max_abs() == 0.0);
            assert!(a.mul(&a).unwrap().sub(&identity).unwrap().max_abs() < 1e-15);
            assert_eq!(a.trace(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn apply_matches_declared_action() {
        let ket = SparseKet::basis(2, 6, &[0, 3]).unwrap();
        let spec = BellOperatorSpec {
            setup: SetupKind::FullPseudospin,
            mode_index: 1,
            angle: FRAC_PI_4,
        };
        // |3> is odd: goes to |2> with phase e^{-ia}
        let out = apply_bell_operator(&spec, &ket).unwrap();
        let amp = out.amplitude(&[0, 2]);
        assert_abs_diff_eq!(amp.re, FRAC_PI_4.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(amp.im, -FRAC_PI_4.sin(), epsilon = 1e-15);
        // setup 1 leaves |3> alone and rotates |0>
        let spec1 = BellOperatorSpec {
            setup: SetupKind::ZerothBlock,
            mode_index: 1,
            angle: 0.9,
        };
        let out1 = apply_bell_operator(&spec1, &ket).unwrap();
        assert_eq!(out1.amplitude(&[0, 3]), Complex64::new(1.0, 0.0));
        let spec0 = BellOperatorSpec {
            setup: SetupKind::ZerothBlock,
            mode_index: 0,
            angle: 0.9,
        };
        let out0 = apply_bell_operator(&spec0, &ket).unwrap();
        let amp0 = out0.amplitude(&[1, 3]);
        assert_abs_diff_eq!(amp0.re, 0.9f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(amp0.im, 0.9f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn applying_twice_returns_the_input() {
        let state = EntangledStateSpec::squeezed_coherent(0.3, 0.5, 1.3).unwrap();
        let ket = crate::fock::build_entangled_state_adaptive(&state).unwrap();
        for setup in [SetupKind::ZerothBlock, SetupKind::FullPseudospin] {
            for mode in 0..3 {
                let spec = BellOperatorSpec {
                    setup,
                    mode_index: mode,
                    angle: -0.37,
                };
                let twice =
                    apply_bell_operator(&spec, &apply_bell_operator(&spec, &ket).unwrap())
                        .unwrap();
                for (idx, amp) in ket.iter() {
                    assert_abs_diff_eq!(twice.amplitude(idx).re, amp.re, epsilon = 1e-14);
                    assert_abs_diff_eq!(twice.amplitude(idx).im, amp.im, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn operators_on_distinct_modes_commute_on_kets() {
        let state = EntangledStateSpec::squeezed_squeezed(0.5, 0.3, 2.1).unwrap();
        let ket = crate::fock::build_entangled_state_adaptive(&state).unwrap();
        let a = BellOperatorSpec {
            setup: SetupKind::FullPseudospin,
            mode_index: 0,
            angle: 0.8,
        };
        let b = BellOperatorSpec {
            setup: SetupKind::FullPseudospin,
            mode_index: 2,
            angle: -1.1,
        };
        let ab = apply_bell_operator(&a, &apply_bell_operator(&b, &ket).unwrap()).unwrap();
        let ba = apply_bell_operator(&b, &apply_bell_operator(&a, &ket).unwrap()).unwrap();
        for (idx, amp) in ab.iter() {
            let other = ba.amplitude(idx);
            assert_abs_diff_eq!(amp.re, other.re, epsilon = 1e-15);
            assert_abs_diff_eq!(amp.im, other.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn hermiticity_on_kets() {
        // <phi|A psi> = <A phi|psi> for a mixed pair of states
        let phi = SparseKet::basis(1, 4, &[1]).unwrap();
        let psi = crate::fock::coherent_ket(0.7, 4).unwrap();
        let spec = BellOperatorSpec {
            setup: SetupKind::FullPseudospin,
            mode_index: 0,
            angle: 0.53,
        };
        let lhs = inner_product(&phi, &apply_bell_operator(&spec, &psi).unwrap()).unwrap();
        let rhs = inner_product(&apply_bell_operator(&spec, &phi).unwrap(), &psi).unwrap();
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-14);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-14);
    }

    #[test]
    fn setups_agree_on_the_zeroth_block() {
        let mut ket = SparseKet::basis(1, 4, &[0]).unwrap();
        // superpose |0> and |1>
        let one = SparseKet::basis(1, 4, &[1]).unwrap();
        for (idx, amp) in one.iter() {
            ket.insert(idx.clone(), amp * Complex64::new(0.6, 0.2));
        }
        for angle in [0.0, 0.7, -2.0] {
            let s1 = apply_bell_operator(
                &BellOperatorSpec {
                    setup: SetupKind::ZerothBlock,
                    mode_index: 0,
                    angle,
                },
                &ket,
            )
            .unwrap();
            let s2 = apply_bell_operator(
                &BellOperatorSpec {
                    setup: SetupKind::FullPseudospin,
                    mode_index: 0,
                    angle,
                },
                &ket,
            )
            .unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn invalid_mode_index_is_rejected() {
        let ket = SparseKet::basis(2, 4, &[0, 0]).unwrap();
        let spec = BellOperatorSpec {
            setup: SetupKind::FullPseudospin,
            mode_index: 2,
            angle: 0.0,
        };
        assert!(apply_bell_operator(&spec, &ket).is_err());
    }

    #[test]
    fn setup_parsing_round_trips() {
        assert_eq!(SetupKind::from_index(1).unwrap(), SetupKind::ZerothBlock);
        assert_eq!(SetupKind::from_index(2).unwrap(), SetupKind::FullPseudospin);
        assert!(SetupKind::from_index(3).is_err());
        assert_eq!(SetupKind::ZerothBlock.to_string(), "setup-1");
    }
}
