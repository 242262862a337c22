//! Python bindings: thin function-level wrappers over the core library.
//!
//! Build with `cargo build -p mermincv --release`; the resulting cdylib in
//! `target/release/` imports as the `mermincv` module (see
//! `python/smoke_test.py` for the path setup).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mermin_cv::{
    self as core, EntangledStateKind, EntangledStateSpec, EvaluationMethod, GridSpec,
    MeasurementAngles, ScanRequest, SetupKind, VerifyConfig,
};

fn value_error(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_kind(state: &str) -> PyResult<EntangledStateKind> {
    match state {
        "sc" => Ok(EntangledStateKind::SqueezedCoherent),
        "ss" => Ok(EntangledStateKind::SqueezedSqueezed),
        other => Err(PyValueError::new_err(format!(
            "state must be 'sc' or 'ss', got '{other}'"
        ))),
    }
}

fn parse_method(method: &str) -> PyResult<EvaluationMethod> {
    match method {
        "analytic" => Ok(EvaluationMethod::Analytic),
        "oracle" => Ok(EvaluationMethod::Oracle),
        other => Err(PyValueError::new_err(format!(
            "method must be 'analytic' or 'oracle', got '{other}'"
        ))),
    }
}

/// (param1, param2) follow the scan convention: (alpha, eta) for sc states,
/// (eta, sigma) for ss states.
fn make_spec(
    kind: EntangledStateKind,
    param1: f64,
    param2: f64,
    phi: f64,
) -> PyResult<EntangledStateSpec> {
    match kind {
        EntangledStateKind::SqueezedCoherent => {
            EntangledStateSpec::squeezed_coherent(param1, param2, phi)
        }
        EntangledStateKind::SqueezedSqueezed => {
            EntangledStateSpec::squeezed_squeezed(param1, param2, phi)
        }
    }
    .map_err(value_error)
}

fn angle_set(
    preset: Option<&str>,
    angles: Option<Vec<(f64, f64)>>,
    parties: usize,
) -> PyResult<MeasurementAngles> {
    if preset.is_some() && angles.is_some() {
        return Err(PyValueError::new_err("pass either preset or angles, not both"));
    }
    let set = match (preset, angles) {
        (Some(name), None) => core::preset(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown preset '{name}'; available: {}",
                core::PRESET_NAMES.join(", ")
            ))
        })?,
        (None, Some(pairs)) => MeasurementAngles::new(pairs).map_err(value_error)?,
        (None, None) => {
            return Err(PyValueError::new_err("either preset or angles is required"))
        }
        _ => unreachable!(),
    };
    if set.parties() != parties {
        return Err(PyValueError::new_err(format!(
            "angle set covers {} parties but this state has {parties}",
            set.parties()
        )));
    }
    Ok(set)
}

/// Full Mermin expectation (M3 for sc, 2 M4 for ss) with metadata.
#[pyfunction]
#[pyo3(signature = (state, setup, param1, param2, phi, *, preset=None, angles=None, method="analytic"))]
#[allow(clippy::too_many_arguments)]
fn mermin_expectation<'py>(
    py: Python<'py>,
    state: &str,
    setup: u8,
    param1: f64,
    param2: f64,
    phi: f64,
    preset: Option<&str>,
    angles: Option<Vec<(f64, f64)>>,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_kind(state)?;
    let setup = SetupKind::from_index(setup).map_err(value_error)?;
    let spec = make_spec(kind, param1, param2, phi)?;
    let poly = core::scan_polynomial(kind);
    let set = angle_set(preset, angles, poly.n())?;
    let bounds = core::scan_bounds(kind).map_err(value_error)?;
    let result =
        core::mermin_expectation(&spec, setup, &poly, &set, parse_method(method)?)
            .map_err(value_error)?;

    let out = PyDict::new(py);
    out.set_item("value", result.value)?;
    out.set_item("abs_value", result.value.abs())?;
    out.set_item("method", result.method.to_string())?;
    out.set_item("truncation", result.truncation_used)?;
    out.set_item("tail_estimate", result.tail_estimate)?;
    out.set_item("classical_bound", bounds.classical)?;
    out.set_item("quantum_bound", bounds.quantum)?;
    out.set_item("violated", result.value.abs() > bounds.classical)?;
    Ok(out)
}

/// One correlator E(a_1, ..., a_n) for a single angle per party.
#[pyfunction]
#[pyo3(signature = (state, setup, param1, param2, phi, angles, method="analytic"))]
fn correlator(
    state: &str,
    setup: u8,
    param1: f64,
    param2: f64,
    phi: f64,
    angles: Vec<f64>,
    method: &str,
) -> PyResult<f64> {
    let spec = make_spec(parse_kind(state)?, param1, param2, phi)?;
    let setup = SetupKind::from_index(setup).map_err(value_error)?;
    let result = match parse_method(method)? {
        EvaluationMethod::Analytic => core::correlator_analytic(&spec, setup, &angles),
        EvaluationMethod::Oracle => core::correlator_oracle(&spec, setup, &angles),
    }
    .map_err(value_error)?;
    Ok(result.value)
}

/// Local-hidden-variable bound of M_n by exhaustive enumeration.
#[pyfunction]
fn classical_bound(n: usize) -> PyResult<f64> {
    let poly = core::build_mermin(n).map_err(value_error)?;
    core::classical_bound(&poly).map_err(value_error)
}

/// Quantum bound 2^((n+1)/2) of M_n.
#[pyfunction]
fn quantum_bound(n: usize) -> PyResult<f64> {
    core::quantum_bound(n).map_err(value_error)
}

/// Terms of M_n as (coefficient, label) pairs, e.g. (1.0, "A'BC").
#[pyfunction]
fn mermin_terms(n: usize) -> PyResult<Vec<(f64, String)>> {
    let poly = core::build_mermin(n).map_err(value_error)?;
    Ok(poly
        .terms()
        .iter()
        .map(|t| {
            (
                *t.coefficient.numer() as f64 / *t.coefficient.denom() as f64,
                t.label(),
            )
        })
        .collect())
}

/// Angle pairs (a, a') of a named preset.
#[pyfunction]
fn preset_angles(name: &str) -> PyResult<Vec<(f64, f64)>> {
    match core::preset(name) {
        Some(set) => Ok(set.pairs().to_vec()),
        None => Err(PyValueError::new_err(format!(
            "unknown preset '{name}'; available: {}",
            core::PRESET_NAMES.join(", ")
        ))),
    }
}

/// Parse a pi-literal ("pi", "-pi/4", "3pi/4") or plain radians.
#[pyfunction]
fn parse_angle(text: &str) -> PyResult<f64> {
    core::parse_angle(text).map_err(value_error)
}

/// Diagonal parameter sweep; returns (param1, param2, value-or-None,
/// violated, method) rows. `value` is None where the branches cancel.
#[pyfunction]
#[pyo3(signature = (state, setup, phi, *, preset=None, angles=None, method="analytic",
                    min=0.001, max=0.95, step=0.005, offset=0.001, workers=None))]
#[allow(clippy::too_many_arguments)]
fn scan_diagonal(
    state: &str,
    setup: u8,
    phi: f64,
    preset: Option<&str>,
    angles: Option<Vec<(f64, f64)>>,
    method: &str,
    min: f64,
    max: f64,
    step: f64,
    offset: f64,
    workers: Option<usize>,
) -> PyResult<Vec<(f64, f64, Option<f64>, bool, String)>> {
    let kind = parse_kind(state)?;
    let poly = core::scan_polynomial(kind);
    let request = ScanRequest {
        kind,
        setup: SetupKind::from_index(setup).map_err(value_error)?,
        phi,
        angles: angle_set(preset, angles, poly.n())?,
        method: parse_method(method)?,
        grid: GridSpec::Diagonal {
            min,
            max,
            step,
            offset,
        },
    };
    let rows = core::run_scan(&request, workers).map_err(value_error)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.param1,
                r.param2,
                r.mermin_value,
                r.violated,
                r.method.to_string(),
            )
        })
        .collect())
}

/// Run the library's invariant battery; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (*, samples=20, seed=20, cutoff=None))]
fn verify<'py>(
    py: Python<'py>,
    samples: usize,
    seed: u64,
    cutoff: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let report = core::run_verification(&VerifyConfig {
        cutoff,
        samples,
        seed,
    })
    .map_err(value_error)?;
    report
        .checks
        .iter()
        .map(|check| {
            let d = PyDict::new(py);
            d.set_item("name", &check.name)?;
            d.set_item("passed", check.passed)?;
            d.set_item("max_deviation", check.max_deviation)?;
            d.set_item("tolerance", check.tolerance)?;
            d.set_item("detail", &check.detail)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn mermincv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mermin_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(correlator, m)?)?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mermin_terms, m)?)?;
    m.add_function(wrap_pyfunction!(preset_angles, m)?)?;
    m.add_function(wrap_pyfunction!(parse_angle, m)?)?;
    m.add_function(wrap_pyfunction!(scan_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("PRESETS", core::PRESET_NAMES.to_vec())?;
    Ok(())
}
