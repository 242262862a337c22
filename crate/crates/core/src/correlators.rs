//! Correlators ⟨A₁…A_n⟩ on the two entangled state families, by closed
//! analytic formulas, by a convergent series (squeezed-coherent under
//! setup 2), and by an independent truncated-Fock-space oracle; plus the
//! assembly of full Mermin expectation values from per-monomial correlators.
//!
//! Every analytic route has an oracle counterpart: the oracle builds the
//! state explicitly, applies the Bell operators as index rewrites, and takes
//! the inner product. Agreement between the two routes is the main
//! correctness argument for the formula transcriptions.

use std::fmt;

use num_complex::Complex64;

use crate::angles::MeasurementAngles;
use crate::bell::{apply_bell_operator, BellOperatorSpec, SetupKind};
use crate::error::{Error, Result};
use crate::fock::{build_entangled_state, inner_product, EntangledStateKind, EntangledStateSpec, SparseKet};
use crate::mermin::MerminPolynomial;

/// How a correlator value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    AnalyticClosedForm,
    AnalyticSeries,
    FockOracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::AnalyticClosedForm => "analytic-closed-form",
            Method::AnalyticSeries => "analytic-series",
            Method::FockOracle => "fock-oracle",
        })
    }
}

/// Evaluation route selector for [`mermin_expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvaluationMethod {
    Analytic,
    Oracle,
}

/// A correlator (or assembled Mermin) value with evaluation metadata.
///
/// `truncation_used` is the number of series terms for the series route, the
/// Fock cutoff for the oracle, and 0 for closed forms; `tail_estimate`
/// bounds what the truncation neglected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorResult {
    pub value: f64,
    pub method: Method,
    pub truncation_used: usize,
    pub tail_estimate: f64,
}

/// Relative additive-term threshold for stopping the setup-2 series.
const SERIES_RELATIVE_TOL: f64 = 1e-15;
/// Hard cap on series terms; the 1/sqrt((2m)!(2m+1)!) decay makes the stop
/// rule trigger after a handful of terms in practice.
const SERIES_MAX_TERMS: usize = 500;

/// The named intermediate quantities of the analytic formulas, evaluated for
/// one spec: K₁, K₂, the normalization constant N_SC, and the overall factor
/// Ω_SS. All are finite and positive for valid, nondegenerate specs; each
/// formula consumes the subset that applies to its state family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticIntermediates {
    pub k1: f64,
    pub k2: f64,
    pub n_sc: f64,
    pub omega_ss: f64,
}

impl AnalyticIntermediates {
    pub fn for_spec(spec: &EntangledStateSpec) -> Result<Self> {
        let (eta, p2) = (spec.eta, spec.second_param);
        let n_sc = spec.normalization()?;
        let omega_ss = 2.0 * (1.0 - eta * eta) * (1.0 - p2 * p2) * n_sc * n_sc;
        Ok(Self {
            k1: (1.0 - eta * eta).sqrt() * (-p2 * p2 / 2.0).exp(),
            k2: (1.0 - p2 * p2).sqrt() * (-eta * eta / 2.0).exp(),
            n_sc,
            omega_ss,
        })
    }
}

/// Geometric remainder 1/(1-x) - 1 - x, computed cancellation-free as
/// x²/(1-x).
fn geom_remainder(x: f64) -> f64 {
    x * x / (1.0 - x)
}

/// Exponential remainder e^x - 1 - x; the series is used at small x where
/// direct evaluation would cancel.
fn exp_remainder(x: f64) -> f64 {
    if x.abs() < 0.125 {
        let mut term = x * x / 2.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-20 * sum.abs() {
            term *= x / k;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

fn closed_form(value: f64) -> CorrelatorResult {
    CorrelatorResult {
        value,
        method: Method::AnalyticClosedForm,
        truncation_used: 0,
        tail_estimate: 0.0,
    }
}

/// ⟨ABC⟩ on the squeezed-coherent state under setup 1 (closed form).
pub fn correlator_sc_setup1(
    alpha: f64,
    eta: f64,
    phi: f64,
    a: f64,
    b: f64,
    c: f64,
) -> Result<CorrelatorResult> {
    let spec = EntangledStateSpec::squeezed_coherent(alpha, eta, phi)?;
    sc_setup1(&spec, &[a, b, c])
}

fn sc_setup1(spec: &EntangledStateSpec, angles: &[f64]) -> Result<CorrelatorResult> {
    let im = AnalyticIntermediates::for_spec(spec)?;
    let (alpha, eta, phi) = (spec.second_param, spec.eta, spec.phi);
    let (a, b, c) = (angles[0], angles[1], angles[2]);
    let (k1_sq, k2_sq, k12) = (im.k1 * im.k1, im.k2 * im.k2, im.k1 * im.k2);
    let ab = a + b;
    let sum = 4.0 * alpha * eta * (k1_sq + k2_sq) * ab.cos() * c.cos()
        + 4.0 * alpha * eta * k12 * phi.cos() * (ab + c).cos()
        + 2.0 * k12 * (eta * eta * (ab - c + phi).cos() + alpha * alpha * (ab - c - phi).cos())
        + 2.0
            * ab.cos()
            * (eta * k1_sq * exp_remainder(alpha * alpha)
                + alpha * k2_sq * exp_remainder(eta * eta))
        + 2.0
            * k12
            * exp_remainder(alpha * eta)
            * (eta * (ab + phi).cos() + alpha * (ab - phi).cos())
        + 2.0
            * c.cos()
            * (alpha * k1_sq * geom_remainder(eta * eta)
                + eta * k2_sq * geom_remainder(alpha * alpha))
        + 2.0
            * k12
            * geom_remainder(alpha * eta)
            * (alpha * (c + phi).cos() + eta * (c - phi).cos())
        + k1_sq * geom_remainder(eta * eta) * exp_remainder(alpha * alpha)
        + k2_sq * geom_remainder(alpha * alpha) * exp_remainder(eta * eta)
        + 2.0 * phi.cos() * k12 * geom_remainder(alpha * eta) * exp_remainder(alpha * eta);
    Ok(closed_form(im.n_sc * im.n_sc * sum))
}

/// ⟨ABC⟩ on the squeezed-coherent state under setup 2 (convergent series).
pub fn correlator_sc_setup2(
    alpha: f64,
    eta: f64,
    phi: f64,
    a: f64,
    b: f64,
    c: f64,
) -> Result<CorrelatorResult> {
    let spec = EntangledStateSpec::squeezed_coherent(alpha, eta, phi)?;
    sc_setup2(&spec, &[a, b, c])
}

fn sc_setup2(spec: &EntangledStateSpec, angles: &[f64]) -> Result<CorrelatorResult> {
    let im = AnalyticIntermediates::for_spec(spec)?;
    let (alpha, eta, phi) = (spec.second_param, spec.eta, spec.phi);
    let (a, b, c) = (angles[0], angles[1], angles[2]);
    let ab = a + b;
    // angle-dependent factors are constant across the series
    let f1 = 4.0 * alpha * eta * ab.cos() * c.cos();
    let f2 = 2.0 * alpha * eta * phi.cos() * (ab + c).cos()
        + eta * eta * (ab - c + phi).cos()
        + alpha * alpha * (ab - c - phi).cos();
    let (k1_sq, k2_sq, k12) = (im.k1 * im.k1, im.k2 * im.k2, im.k1 * im.k2);
    let inv_eta4 = 1.0 / (1.0 - eta.powi(4));
    let inv_alpha4 = 1.0 / (1.0 - alpha.powi(4));
    let inv_cross = 1.0 / (1.0 - (alpha * eta) * (alpha * eta));

    // weight w_m = 1 / (sqrt((2m)!) sqrt((2m+1)!));
    // w_m / w_{m-1} = 1 / (2m sqrt(4m^2 - 1))
    let mut weight = 1.0;
    let mut alpha_4m = 1.0; // alpha^{4m}
    let mut eta_4m = 1.0; // eta^{4m}
    let mut cross_2m = 1.0; // (alpha eta)^{2m}
    let mut partial = 0.0;
    let mut terms = 0;
    let mut last = f64::INFINITY;
    while terms < SERIES_MAX_TERMS {
        if terms > 0 {
            let m = terms as f64;
            weight /= 2.0 * m * (4.0 * m * m - 1.0).sqrt();
            alpha_4m *= alpha.powi(4);
            eta_4m *= eta.powi(4);
            cross_2m *= (alpha * eta) * (alpha * eta);
        }
        let term = weight
            * (f1 * (k1_sq * alpha_4m * inv_eta4 + k2_sq * eta_4m * inv_alpha4)
                + 2.0 * k12 * cross_2m * inv_cross * f2);
        partial += term;
        terms += 1;
        last = term.abs();
        if last < SERIES_RELATIVE_TOL * (partial.abs() + 1.0) {
            break;
        }
    }
    Ok(CorrelatorResult {
        value: im.n_sc * im.n_sc * partial,
        method: Method::AnalyticSeries,
        truncation_used: terms,
        tail_estimate: last,
    })
}

/// ⟨ABCD⟩ on the squeezed-squeezed state under setup 1 (closed form).
pub fn correlator_ss_setup1(
    eta: f64,
    sigma: f64,
    phi: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
) -> Result<CorrelatorResult> {
    let spec = EntangledStateSpec::squeezed_squeezed(eta, sigma, phi)?;
    ss_setup1(&spec, &[a, b, c, d])
}

fn ss_setup1(spec: &EntangledStateSpec, angles: &[f64]) -> Result<CorrelatorResult> {
    let im = AnalyticIntermediates::for_spec(spec)?;
    let (eta, sigma, phi) = (spec.eta, spec.second_param, spec.phi);
    let (a, b, c, d) = (angles[0], angles[1], angles[2], angles[3]);
    let (ab, cd) = (a + b, c + d);
    let g_eta = geom_remainder(eta * eta);
    let g_sigma = geom_remainder(sigma * sigma);
    let g_cross = geom_remainder(eta * sigma);
    let sum = 4.0 * eta * sigma * ab.cos() * cd.cos()
        + 2.0 * eta * sigma * phi.cos() * (ab + cd).cos()
        + eta * eta * (ab - cd + phi).cos()
        + sigma * sigma * (ab - cd - phi).cos()
        + (ab.cos() + cd.cos()) * (eta * g_sigma + sigma * g_eta)
        + g_cross
            * (eta * ((ab + phi).cos() + (cd - phi).cos())
                + sigma * ((ab - phi).cos() + (cd + phi).cos()))
        + g_eta * g_sigma
        + phi.cos() * g_cross * g_cross;
    Ok(closed_form(im.omega_ss * sum))
}

/// ⟨ABCD⟩ on the squeezed-squeezed state under setup 2 (closed form).
pub fn correlator_ss_setup2(
    eta: f64,
    sigma: f64,
    phi: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
) -> Result<CorrelatorResult> {
    let spec = EntangledStateSpec::squeezed_squeezed(eta, sigma, phi)?;
    ss_setup2(&spec, &[a, b, c, d])
}

fn ss_setup2(spec: &EntangledStateSpec, angles: &[f64]) -> Result<CorrelatorResult> {
    let im = AnalyticIntermediates::for_spec(spec)?;
    let (eta, sigma, phi) = (spec.eta, spec.second_param, spec.phi);
    let (a, b, c, d) = (angles[0], angles[1], angles[2], angles[3]);
    let (ab, cd) = (a + b, c + d);
    let pair_factor = 1.0 / ((1.0 - eta.powi(4)) * (1.0 - sigma.powi(4)));
    let cross = 1.0 - (eta * sigma) * (eta * sigma);
    let cross_factor = 1.0 / (cross * cross);
    let sum = 4.0 * eta * sigma * ab.cos() * cd.cos() * pair_factor
        + cross_factor
            * (2.0 * eta * sigma * phi.cos() * (ab + cd).cos()
                + eta * eta * (ab - cd + phi).cos()
                + sigma * sigma * (ab - cd - phi).cos());
    Ok(closed_form(im.omega_ss * sum))
}

/// Dispatch to the analytic route matching (state kind, setup).
pub fn correlator_analytic(
    spec: &EntangledStateSpec,
    setup: SetupKind,
    angles: &[f64],
) -> Result<CorrelatorResult> {
    check_angle_count(spec, angles)?;
    match (spec.kind, setup) {
        (EntangledStateKind::SqueezedCoherent, SetupKind::ZerothBlock) => sc_setup1(spec, angles),
        (EntangledStateKind::SqueezedCoherent, SetupKind::FullPseudospin) => {
            sc_setup2(spec, angles)
        }
        (EntangledStateKind::SqueezedSqueezed, SetupKind::ZerothBlock) => ss_setup1(spec, angles),
        (EntangledStateKind::SqueezedSqueezed, SetupKind::FullPseudospin) => {
            ss_setup2(spec, angles)
        }
    }
}

fn check_angle_count(spec: &EntangledStateSpec, angles: &[f64]) -> Result<()> {
    if angles.len() != spec.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "{} angles given for a {}-mode state",
            angles.len(),
            spec.num_modes()
        )));
    }
    Ok(())
}

/// ⟨ket|A₁…A_n|ket⟩ for an arbitrary normalized ket, one angle per mode.
/// The product of commuting Hermitian involutions is Hermitian, so the
/// result must be real; a residual imaginary part signals an internal bug.
pub fn oracle_correlator_on(ket: &SparseKet, setup: SetupKind, angles: &[f64]) -> Result<f64> {
    if angles.len() != ket.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "{} angles given for a {}-mode ket",
            angles.len(),
            ket.num_modes()
        )));
    }
    let mut current = ket.clone();
    for (mode_index, &angle) in angles.iter().enumerate() {
        let op = BellOperatorSpec {
            setup,
            mode_index,
            angle,
        };
        current = apply_bell_operator(&op, &current)?;
    }
    let value: Complex64 = inner_product(ket, &current)?;
    assert!(
        value.im.abs() < 1e-10,
        "oracle correlator has imaginary part {:e}",
        value.im
    );
    Ok(value.re)
}

/// Fock-oracle correlator at an explicit cutoff (propagates a truncation
/// error when the cutoff is too small for the spec).
pub fn correlator_oracle_with_cutoff(
    spec: &EntangledStateSpec,
    setup: SetupKind,
    angles: &[f64],
    cutoff: usize,
) -> Result<CorrelatorResult> {
    check_angle_count(spec, angles)?;
    let ket = build_entangled_state(spec, cutoff)?;
    let value = oracle_correlator_on(&ket, setup, angles)?;
    Ok(CorrelatorResult {
        value,
        method: Method::FockOracle,
        truncation_used: cutoff,
        tail_estimate: spec.max_branch_tail(cutoff),
    })
}

/// Fock-oracle correlator at the spec's adaptive cutoff.
pub fn correlator_oracle(
    spec: &EntangledStateSpec,
    setup: SetupKind,
    angles: &[f64],
) -> Result<CorrelatorResult> {
    correlator_oracle_with_cutoff(spec, setup, angles, spec.adaptive_cutoff())
}

fn rational_to_f64(r: num_rational::Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Assemble ⟨poly⟩ = Σ coefficient × ⟨A₁…A_n⟩(term angles) over the
/// polynomial's monomials, with primed/unprimed angles substituted per term.
///
/// The oracle route builds the state once and reuses it for every monomial.
/// The result's metadata aggregates over terms (max truncation and tail);
/// its `value` is the full Mermin expectation, which may exceed 1 in
/// magnitude (bounded by the quantum bound instead).
pub fn mermin_expectation(
    spec: &EntangledStateSpec,
    setup: SetupKind,
    poly: &MerminPolynomial,
    angles: &MeasurementAngles,
    method: EvaluationMethod,
) -> Result<CorrelatorResult> {
    if poly.n() != spec.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "polynomial has {} parties but the state has {} modes",
            poly.n(),
            spec.num_modes()
        )));
    }
    if angles.parties() != poly.n() {
        return Err(Error::InvalidArgument(format!(
            "angle set covers {} parties but the polynomial has {}",
            angles.parties(),
            poly.n()
        )));
    }
    match method {
        EvaluationMethod::Analytic => {
            let mut value = 0.0;
            let mut truncation_used = 0;
            let mut tail_estimate = 0.0f64;
            let mut out_method = Method::AnalyticClosedForm;
            for term in poly.terms() {
                let term_angles = angles.for_choices(&term.choices)?;
                let r = correlator_analytic(spec, setup, &term_angles)?;
                value += rational_to_f64(term.coefficient) * r.value;
                truncation_used = truncation_used.max(r.truncation_used);
                tail_estimate = tail_estimate.max(r.tail_estimate);
                out_method = r.method;
            }
            Ok(CorrelatorResult {
                value,
                method: out_method,
                truncation_used,
                tail_estimate,
            })
        }
        EvaluationMethod::Oracle => {
            let cutoff = spec.adaptive_cutoff();
            let ket = build_entangled_state(spec, cutoff)?;
            let mut value = 0.0;
            for term in poly.terms() {
                let term_angles = angles.for_choices(&term.choices)?;
                value += rational_to_f64(term.coefficient)
                    * oracle_correlator_on(&ket, setup, &term_angles)?;
            }
            Ok(CorrelatorResult {
                value,
                method: Method::FockOracle,
                truncation_used: cutoff,
                tail_estimate: spec.max_branch_tail(cutoff),
            })
        }
    }
}
