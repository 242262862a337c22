//! Randomized invariants over states, operators and scans.

use proptest::prelude::*;
use std::f64::consts::TAU;

use mermin_cv::{
    apply_bell_operator, build_entangled_state, build_entangled_state_adaptive, build_mermin,
    correlator_analytic, inner_product, run_scan, scan_bounds, BellOperatorSpec,
    EntangledStateKind, EntangledStateSpec, EvaluationMethod, GridSpec, MeasurementAngles,
    ScanRequest, SetupKind,
};

fn setups() -> impl Strategy<Value = SetupKind> {
    prop_oneof![
        Just(SetupKind::ZerothBlock),
        Just(SetupKind::FullPseudospin),
    ]
}

fn kinds() -> impl Strategy<Value = EntangledStateKind> {
    prop_oneof![
        Just(EntangledStateKind::SqueezedCoherent),
        Just(EntangledStateKind::SqueezedSqueezed),
    ]
}

fn spec_for(kind: EntangledStateKind, p1: f64, p2: f64, phi: f64) -> EntangledStateSpec {
    match kind {
        EntangledStateKind::SqueezedCoherent => {
            EntangledStateSpec::squeezed_coherent(p1, p2, phi).unwrap()
        }
        EntangledStateKind::SqueezedSqueezed => {
            EntangledStateSpec::squeezed_squeezed(p1, p2, phi).unwrap()
        }
    }
}

// Parameter window for tests that build Fock-space kets: big enough to hit
// multi-block structure, small enough to keep adaptive cutoffs cheap.
const P: std::ops::Range<f64> = 0.05..0.75;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // A(A|psi>) = |psi>, amplitude by amplitude.
    #[test]
    fn bell_operator_is_an_involution(
        kind in kinds(),
        setup in setups(),
        p1 in P, p2 in P,
        phi in 0.0..TAU,
        angle in -3.2f64..3.2,
        mode_pick in 0usize..4,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-3);
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        let op = BellOperatorSpec {
            setup,
            mode_index: mode_pick % ket.num_modes(),
            angle,
        };
        let twice = apply_bell_operator(&op, &apply_bell_operator(&op, &ket).unwrap()).unwrap();
        prop_assert_eq!(twice.len(), ket.len());
        for (idx, amp) in ket.iter() {
            let back = twice.amplitude(idx);
            prop_assert!((back - amp).norm() < 1e-14,
                "amplitude at {:?} moved by {:e}", idx, (back - amp).norm());
        }
    }

    // <phi|A psi> = conj(<psi|A phi>) for states of the same shape.
    #[test]
    fn bell_operator_is_hermitian(
        setup in setups(),
        p1 in P, p2 in P, q1 in P, q2 in P,
        phi1 in 0.0..TAU, phi2 in 0.0..TAU,
        angle in -3.2f64..3.2,
        mode_pick in 0usize..3,
    ) {
        let a = spec_for(EntangledStateKind::SqueezedCoherent, p1, p2, phi1);
        let b = spec_for(EntangledStateKind::SqueezedCoherent, q1, q2, phi2);
        prop_assume!(a.unnormalized_norm_sq() > 1e-3);
        prop_assume!(b.unnormalized_norm_sq() > 1e-3);
        let cutoff = a.adaptive_cutoff().max(b.adaptive_cutoff());
        let psi = build_entangled_state(&a, cutoff).unwrap();
        let chi = build_entangled_state(&b, cutoff).unwrap();
        let op = BellOperatorSpec { setup, mode_index: mode_pick, angle };
        let lhs = inner_product(&chi, &apply_bell_operator(&op, &psi).unwrap()).unwrap();
        let rhs = inner_product(&psi, &apply_bell_operator(&op, &chi).unwrap()).unwrap();
        prop_assert!((lhs - rhs.conj()).norm() < 1e-12,
            "hermiticity defect {:e}", (lhs - rhs.conj()).norm());
    }

    // Bell operators permute basis states with unimodular phases.
    #[test]
    fn bell_operator_preserves_norm(
        kind in kinds(),
        setup in setups(),
        p1 in P, p2 in P,
        phi in 0.0..TAU,
        angle in -3.2f64..3.2,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-3);
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        let moved = apply_bell_operator(
            &BellOperatorSpec { setup, mode_index: 0, angle },
            &ket,
        ).unwrap();
        prop_assert!((moved.norm_sq() - ket.norm_sq()).abs() < 1e-12);
    }

    // Adaptive construction hits the unit-norm contract.
    #[test]
    fn adaptive_state_is_normalized(
        kind in kinds(),
        p1 in P, p2 in P,
        phi in 0.0..TAU,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-9);
        let ket = build_entangled_state_adaptive(&spec).unwrap();
        prop_assert!((ket.norm_sq() - 1.0).abs() < 1e-10);
    }

    // Raising the cutoff only appends support: shared amplitudes are
    // bitwise identical because normalization is analytic, not a posteriori.
    #[test]
    fn cutoff_refinement_keeps_amplitudes(
        kind in kinds(),
        p1 in P, p2 in P,
        phi in 0.0..TAU,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-3);
        let base = spec.adaptive_cutoff();
        let small = build_entangled_state(&spec, base).unwrap();
        let large = build_entangled_state(&spec, base + 6).unwrap();
        prop_assert!(large.len() >= small.len());
        for (idx, amp) in small.iter() {
            let other = large.amplitude(idx);
            prop_assert!(other.re == amp.re && other.im == amp.im,
                "amplitude at {:?} changed under refinement", idx);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Single correlators are expectation values of unit-spectrum operators.
    #[test]
    fn correlator_magnitude_is_bounded(
        kind in kinds(),
        setup in setups(),
        p1 in 0.01f64..0.94, p2 in 0.01f64..0.94,
        phi in 0.0..TAU,
        a0 in -3.2f64..3.2, a1 in -3.2f64..3.2,
        a2 in -3.2f64..3.2, a3 in -3.2f64..3.2,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-6);
        let angles = [a0, a1, a2, a3];
        let value = correlator_analytic(&spec, setup, &angles[..spec.num_modes()])
            .unwrap()
            .value;
        prop_assert!(value.abs() <= 1.0 + 1e-10, "correlator {value} outside [-1, 1]");
    }

    // phi enters only through cos(phi) and e^{i phi}: period 2 pi.
    #[test]
    fn correlator_is_periodic_in_phi(
        kind in kinds(),
        setup in setups(),
        p1 in 0.01f64..0.94, p2 in 0.01f64..0.94,
        phi in 0.0..TAU,
        a0 in -3.2f64..3.2, a1 in -3.2f64..3.2,
        a2 in -3.2f64..3.2, a3 in -3.2f64..3.2,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-6);
        let shifted = spec_for(kind, p1, p2, phi + TAU);
        let angles = [a0, a1, a2, a3];
        let n = spec.num_modes();
        let base = correlator_analytic(&spec, setup, &angles[..n]).unwrap().value;
        let wrapped = correlator_analytic(&shifted, setup, &angles[..n]).unwrap().value;
        prop_assert!((base - wrapped).abs() < 1e-9);
    }

    // Swapping the branches is a relabeling plus a global phase:
    // E(p1, p2, phi) = E(p2, p1, -phi).
    #[test]
    fn branch_swap_with_phase_flip_is_a_symmetry(
        kind in kinds(),
        setup in setups(),
        p1 in 0.02f64..0.9, p2 in 0.02f64..0.9,
        phi in 0.0..TAU,
        a0 in -3.2f64..3.2, a1 in -3.2f64..3.2,
        a2 in -3.2f64..3.2, a3 in -3.2f64..3.2,
    ) {
        let spec = spec_for(kind, p1, p2, phi);
        let swapped = spec_for(kind, p2, p1, -phi);
        prop_assume!(spec.unnormalized_norm_sq() > 1e-6);
        let angles = [a0, a1, a2, a3];
        let n = spec.num_modes();
        let lhs = correlator_analytic(&spec, setup, &angles[..n]).unwrap().value;
        let rhs = correlator_analytic(&swapped, setup, &angles[..n]).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-10, "swap asymmetry {:e}", (lhs - rhs).abs());
    }

    // Swapping primes twice is the identity on any Mermin polynomial.
    #[test]
    fn prime_swap_involution(n in 1usize..=6) {
        let poly = build_mermin(n).unwrap();
        prop_assert_eq!(poly.prime_swap().prime_swap(), poly);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // The violated flag is exactly "|value| strictly above the LHV bound".
    #[test]
    fn violated_flag_matches_strict_inequality(
        kind in kinds(),
        setup in setups(),
        phi_pick in 0usize..2,
        min in 0.05f64..0.4,
    ) {
        let phi = if phi_pick == 0 { 0.0 } else { std::f64::consts::PI };
        let angles = match (kind, phi_pick) {
            (EntangledStateKind::SqueezedCoherent, 0) => "sc-zero",
            (EntangledStateKind::SqueezedCoherent, _) => "sc-pi",
            (EntangledStateKind::SqueezedSqueezed, 0) => "ss-zero",
            (EntangledStateKind::SqueezedSqueezed, _) => "ss-pi",
        };
        let request = ScanRequest {
            kind,
            setup,
            phi,
            angles: mermin_cv::preset(angles).unwrap(),
            method: EvaluationMethod::Analytic,
            grid: GridSpec::Diagonal { min, max: min + 0.4, step: 0.05, offset: 0.001 },
        };
        let classical = scan_bounds(kind).unwrap().classical;
        for row in run_scan(&request, None).unwrap() {
            match row.mermin_value {
                Some(value) => prop_assert_eq!(row.violated, value.abs() > classical),
                None => prop_assert!(!row.violated),
            }
        }
    }

    // Angle sets reject mismatched party counts instead of guessing.
    #[test]
    fn angle_arity_is_enforced(extra in 0usize..3) {
        let pairs = vec![(0.0, 1.0); 5 + extra];
        let angles = MeasurementAngles::new(pairs).unwrap();
        let spec = EntangledStateSpec::squeezed_coherent(0.3, 0.4, 0.0).unwrap();
        let poly = build_mermin(3).unwrap();
        let result = mermin_cv::mermin_expectation(
            &spec,
            SetupKind::ZerothBlock,
            &poly,
            &angles,
            EvaluationMethod::Analytic,
        );
        prop_assert!(result.is_err());
    }
}
