//! Mermin-inequality correlators for multipartite continuous-variable
//! entangled states measured with pseudospin Bell operators.
//!
//! The library evaluates ⟨M₃⟩ for three-mode squeezed+coherent
//! superpositions and ⟨2M₄⟩ for four-mode squeezed+squeezed superpositions,
//! through two independent routes:
//!
//! * **analytic** — closed-form correlator formulas (one route needs a
//!   rapidly converging series), and
//! * **oracle** — direct expectation values on sparse truncated-Fock-space
//!   kets, with adaptive cutoffs chosen from analytic tail bounds.
//!
//! Around that core sit the symbolic Mermin recursion with exact rational
//! coefficients, exhaustive local-hidden-variable bound enumeration,
//! measurement-angle presets, parameter-space scans with CSV output, and a
//! self-check battery cross-validating the two routes.
//!
//! ```
//! use mermin_cv::{preset, build_mermin, mermin_expectation};
//! use mermin_cv::{EntangledStateSpec, EvaluationMethod, SetupKind};
//!
//! let spec = EntangledStateSpec::squeezed_coherent(0.40, 0.41, std::f64::consts::PI)?;
//! let m3 = build_mermin(3)?;
//! let angles = preset("sc-pi").unwrap();
//! let result = mermin_expectation(
//!     &spec,
//!     SetupKind::ZerothBlock,
//!     &m3,
//!     &angles,
//!     EvaluationMethod::Analytic,
//! )?;
//! assert!(result.value.abs() > 2.0); // violation
//! # Ok::<(), mermin_cv::Error>(())
//! ```

pub mod angles;
pub mod bell;
pub mod correlators;
pub mod error;
pub mod fock;
pub mod mermin;
pub mod scan;
pub mod verify;

pub use angles::{parse_angle, preset, MeasurementAngles, PRESET_NAMES};
pub use bell::{
    apply_bell_operator, bell_matrix, pseudospin, verify_operator_algebra,
    verify_pseudospin_algebra, AlgebraReport, BellOperatorSpec, PseudospinComponent,
    PseudospinMatrix, SetupKind, SparseMatrix,
};
pub use correlators::{
    correlator_analytic, correlator_oracle, correlator_oracle_with_cutoff, correlator_sc_setup1,
    correlator_sc_setup2, correlator_ss_setup1, correlator_ss_setup2, mermin_expectation,
    oracle_correlator_on, CorrelatorResult, EvaluationMethod, Method,
};
pub use error::{Error, Result};
pub use fock::{
    build_entangled_state, build_entangled_state_adaptive, coherent_ket, inner_product, tensor,
    two_mode_squeezed_ket, EntangledStateKind, EntangledStateSpec, MultiIndex, SparseKet,
};
pub use mermin::{
    build_mermin, classical_bound, quantum_bound, reduce_with_identity, BoundPair, Choice,
    MerminPolynomial, MerminTerm, MAX_ENUMERATION_PARTIES,
};
pub use scan::{
    format_significant, max_violation, run_scan, scan_bounds, scan_polynomial, write_csv,
    AxisSpec, GridSpec, MaxViolation, ScanRequest, ScanRow, WORKERS_ENV_VAR,
};
pub use verify::{run_verification, CheckResult, VerificationReport, VerifyConfig};
