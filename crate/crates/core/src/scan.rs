//! Parameter-space scans: diagonal (p, p + offset) sweeps and rectangular
//! grids, evaluated by a worker pool with deterministic, grid-ordered
//! output, plus CSV emission and violation-maximum extraction.
//!
//! Squeezed-coherent scans evaluate ⟨M₃⟩ (classical bound 2); squeezed-
//! squeezed scans evaluate ⟨2M₄⟩ (classical bound 4). Degenerate grid
//! points — branches cancelling at φ=π with equal parameters — produce rows
//! with an empty value instead of failing the whole scan.

use num_rational::Rational64;
use rayon::prelude::*;

use crate::angles::MeasurementAngles;
use crate::bell::SetupKind;
use crate::correlators::{mermin_expectation, EvaluationMethod, Method};
use crate::error::{Error, Result};
use crate::fock::{EntangledStateKind, EntangledStateSpec};
use crate::mermin::{build_mermin, classical_bound, quantum_bound, BoundPair, MerminPolynomial};

/// Environment variable supplying the default worker count.
pub const WORKERS_ENV_VAR: &str = "MERMIN_CV_WORKERS";

/// One axis of a rectangular grid: `points` evenly spaced values over
/// [min, max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Grid over the two state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// param1 sweeps min..=max in `step` increments; param2 = param1 + offset.
    Diagonal {
        min: f64,
        max: f64,
        step: f64,
        offset: f64,
    },
    /// Independent axes, row-major order (axis1 outer, axis2 inner).
    Rect { axis1: AxisSpec, axis2: AxisSpec },
}

impl GridSpec {
    /// Default diagonal sweep: p in 0.001..=0.946 stepping 0.005, second
    /// parameter offset by 0.001.
    pub fn default_diagonal() -> Self {
        GridSpec::Diagonal {
            min: 0.001,
            max: 0.95,
            step: 0.005,
            offset: 0.001,
        }
    }

    /// Default rectangular grid: 200 x 200 points over [0.001, 0.95]^2.
    pub fn default_rect() -> Self {
        let axis = AxisSpec {
            min: 0.001,
            max: 0.95,
            points: 200,
        };
        GridSpec::Rect {
            axis1: axis,
            axis2: axis,
        }
    }

    /// Materialize the grid points in row-major order, validating that every
    /// point stays strictly inside the open unit square.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        match *self {
            GridSpec::Diagonal {
                min,
                max,
                step,
                offset,
            } => {
                if !(step > 0.0) {
                    return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
                }
                if !(offset >= 0.0) {
                    return Err(Error::InvalidGrid(format!(
                        "offset must be nonnegative, got {offset}"
                    )));
                }
                if !(min > 0.0 && max >= min && max + offset < 1.0) {
                    return Err(Error::InvalidGrid(format!(
                        "need 0 < min <= max and max + offset < 1, got min={min} max={max} offset={offset}"
                    )));
                }
                let count = ((max - min) / step + 1e-9).floor() as usize + 1;
                Ok((0..count)
                    .map(|k| {
                        let p = min + k as f64 * step;
                        (p, p + offset)
                    })
                    .collect())
            }
            GridSpec::Rect { axis1, axis2 } => {
                let xs = axis_values(&axis1)?;
                let ys = axis_values(&axis2)?;
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for &x in &xs {
                    for &y in &ys {
                        out.push((x, y));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn axis_values(axis: &AxisSpec) -> Result<Vec<f64>> {
    if !(axis.min > 0.0 && axis.max >= axis.min && axis.max < 1.0) {
        return Err(Error::InvalidGrid(format!(
            "axis must satisfy 0 < min <= max < 1, got min={} max={}",
            axis.min, axis.max
        )));
    }
    if axis.points == 0 {
        return Err(Error::InvalidGrid("axis needs at least one point".into()));
    }
    if axis.points == 1 {
        return Ok(vec![axis.min]);
    }
    let span = axis.max - axis.min;
    let last = (axis.points - 1) as f64;
    Ok((0..axis.points)
        .map(|k| axis.min + span * k as f64 / last)
        .collect())
}

/// Everything needed to run one scan.
#[derive(Debug, Clone)]
pub struct ScanRequest {
    pub kind: EntangledStateKind,
    pub setup: SetupKind,
    pub phi: f64,
    pub angles: MeasurementAngles,
    pub method: EvaluationMethod,
    pub grid: GridSpec,
}

/// One evaluated grid point. `mermin_value` is `None` at degenerate points,
/// which are never counted as violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub param1: f64,
    pub param2: f64,
    pub mermin_value: Option<f64>,
    pub violated: bool,
    pub method: Method,
}

/// The polynomial a scan of this state family evaluates: M₃ for
/// squeezed-coherent, 2·M₄ for squeezed-squeezed.
pub fn scan_polynomial(kind: EntangledStateKind) -> MerminPolynomial {
    match kind {
        EntangledStateKind::SqueezedCoherent => {
            build_mermin(3).expect("three parties is valid")
        }
        EntangledStateKind::SqueezedSqueezed => build_mermin(4)
            .expect("four parties is valid")
            .scaled(Rational64::from_integer(2)),
    }
}

/// Classical and quantum bounds for the scan polynomial of a state family.
pub fn scan_bounds(kind: EntangledStateKind) -> Result<BoundPair> {
    let classical = classical_bound(&scan_polynomial(kind))?;
    let quantum = match kind {
        EntangledStateKind::SqueezedCoherent => quantum_bound(3)?,
        EntangledStateKind::SqueezedSqueezed => 2.0 * quantum_bound(4)?,
    };
    Ok(BoundPair { classical, quantum })
}

fn nominal_method(kind: EntangledStateKind, setup: SetupKind, method: EvaluationMethod) -> Method {
    match method {
        EvaluationMethod::Oracle => Method::FockOracle,
        EvaluationMethod::Analytic => match (kind, setup) {
            (EntangledStateKind::SqueezedCoherent, SetupKind::FullPseudospin) => {
                Method::AnalyticSeries
            }
            _ => Method::AnalyticClosedForm,
        },
    }
}

fn parse_worker_count(value: &str) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::InvalidArgument(format!(
            "{WORKERS_ENV_VAR} must be a positive integer, got '{value}'"
        ))),
    }
}

fn resolve_workers(workers: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "worker count must be positive".into(),
            ));
        }
        return Ok(Some(n));
    }
    match std::env::var(WORKERS_ENV_VAR) {
        Ok(value) => parse_worker_count(&value).map(Some),
        Err(_) => Ok(None),
    }
}

fn evaluate_point(
    request: &ScanRequest,
    poly: &MerminPolynomial,
    classical: f64,
    param1: f64,
    param2: f64,
) -> Result<ScanRow> {
    let spec = match request.kind {
        EntangledStateKind::SqueezedCoherent => {
            EntangledStateSpec::squeezed_coherent(param1, param2, request.phi)
        }
        EntangledStateKind::SqueezedSqueezed => {
            EntangledStateSpec::squeezed_squeezed(param1, param2, request.phi)
        }
    }?;
    match mermin_expectation(&spec, request.setup, poly, &request.angles, request.method) {
        Ok(result) => Ok(ScanRow {
            param1,
            param2,
            mermin_value: Some(result.value),
            violated: result.value.abs() > classical,
            method: result.method,
        }),
        Err(Error::DegenerateState { .. }) => Ok(ScanRow {
            param1,
            param2,
            mermin_value: None,
            violated: false,
            method: nominal_method(request.kind, request.setup, request.method),
        }),
        Err(other) => Err(other),
    }
}

/// Evaluate the full grid. Points are distributed over a worker pool
/// (`workers`, else the `MERMIN_CV_WORKERS` environment variable, else one
/// worker per core) and gathered back in grid order, so the output is
/// deterministic regardless of parallelism.
pub fn run_scan(request: &ScanRequest, workers: Option<usize>) -> Result<Vec<ScanRow>> {
    let points = request.grid.points()?;
    if points.is_empty() {
        return Err(Error::EmptyScan);
    }
    let poly = scan_polynomial(request.kind);
    if request.angles.parties() != poly.n() {
        return Err(Error::InvalidArgument(format!(
            "angle set covers {} parties but this scan needs {}",
            request.angles.parties(),
            poly.n()
        )));
    }
    let classical = classical_bound(&poly)?;
    let evaluate = |&(p1, p2): &(f64, f64)| evaluate_point(request, &poly, classical, p1, p2);
    let rows: Vec<Result<ScanRow>> = match resolve_workers(workers)? {
        Some(count) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
            pool.install(|| points.par_iter().map(evaluate).collect())
        }
        None => points.par_iter().map(evaluate).collect(),
    };
    rows.into_iter().collect()
}

/// Format with a fixed number of significant digits, in plain decimal.
pub fn format_significant(value: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if value == 0.0 || !value.is_finite() {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let exponent = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Write rows as CSV: header `param1,param2,value,violated,method`, LF line
/// endings, 12 significant digits, empty value field for degenerate points.
pub fn write_csv<W: std::io::Write>(rows: &[ScanRow], mut out: W) -> Result<()> {
    out.write_all(b"param1,param2,value,violated,method\n")?;
    for row in rows {
        let value = row
            .mermin_value
            .map(|v| format_significant(v, 12))
            .unwrap_or_default();
        write!(
            out,
            "{},{},{},{},{}\n",
            format_significant(row.param1, 12),
            format_significant(row.param2, 12),
            value,
            row.violated,
            row.method,
        )?;
    }
    Ok(())
}

/// The scan row with the largest |value|, with the bounds it is judged
/// against.
#[derive(Debug, Clone, Copy)]
pub struct MaxViolation {
    pub row: ScanRow,
    pub bounds: BoundPair,
}

/// Run the scan and return the row maximizing |⟨M⟩|. Degenerate rows are
/// skipped; ties resolve to the earliest grid point.
pub fn max_violation(request: &ScanRequest, workers: Option<usize>) -> Result<MaxViolation> {
    let rows = run_scan(request, workers)?;
    let mut best: Option<ScanRow> = None;
    for row in rows {
        let Some(value) = row.mermin_value else {
            continue;
        };
        let beat = match &best {
            Some(b) => value.abs() > b.mermin_value.unwrap().abs(),
            None => true,
        };
        if beat {
            best = Some(row);
        }
    }
    let row = best.ok_or(Error::EmptyScan)?;
    Ok(MaxViolation {
        row,
        bounds: scan_bounds(request.kind)?,
    })
}
