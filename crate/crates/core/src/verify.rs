//! The self-check battery behind `verify`: operator algebra at fixed and
//! adaptive cutoffs, pseudospin commutation relations, recursion
//! consistency against the literal term expansions, bound enumeration, and
//! seeded oracle-vs-analytic sampling over all four correlator routes.
//!
//! Runtime failures (e.g. a forced cutoff too small for a sampled state)
//! are folded into failed checks rather than aborting the battery, so a
//! report always covers every check by name.

use num_rational::Rational64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2, TAU};

use crate::bell::{verify_operator_algebra, verify_pseudospin_algebra, SetupKind};
use crate::correlators::{correlator_analytic, correlator_oracle, correlator_oracle_with_cutoff};
use crate::error::{Error, Result};
use crate::fock::{EntangledStateKind, EntangledStateSpec};
use crate::mermin::{
    build_mermin, classical_bound, quantum_bound, reduce_with_identity, Choice, MerminPolynomial,
    MerminTerm,
};

/// Max tolerated deviation in the matrix-algebra checks.
pub const ALGEBRA_TOLERANCE: f64 = 1e-13;
/// Max tolerated |analytic − oracle| over the sampled tuples.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Sampled parameters stay in this range; tuples whose unnormalized norm²
/// falls below `MIN_NORM_SQ` (branches nearly cancelling) are resampled so
/// the comparison is not dominated by conditioning loss.
const PARAM_RANGE: std::ops::Range<f64> = 0.02..0.95;
const MIN_NORM_SQ: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Forced oracle cutoff; `None` picks the adaptive cutoff per state.
    pub cutoff: Option<usize>,
    /// Random (parameters, φ, angles) tuples per correlator route.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            cutoff: None,
            samples: 100,
            seed: 20,
        }
    }
}

/// One named check: its worst deviation against its tolerance.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Failure description or sampling context; empty when unremarkable.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub samples: usize,
    pub seed: u64,
    pub forced_cutoff: Option<usize>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn check(name: String, tolerance: f64, body: impl FnOnce() -> Result<(f64, String)>) -> CheckResult {
    match body() {
        Ok((max_deviation, detail)) => CheckResult {
            passed: max_deviation <= tolerance,
            name,
            max_deviation,
            tolerance,
            detail,
        },
        Err(error) => CheckResult {
            name,
            passed: false,
            max_deviation: f64::INFINITY,
            tolerance,
            detail: error.to_string(),
        },
    }
}

fn literal_term(coefficient: i64, pattern: &str) -> MerminTerm {
    let choices = pattern
        .chars()
        .map(|c| match c {
            'u' => Choice::Unprimed,
            _ => Choice::Primed,
        })
        .collect();
    MerminTerm {
        coefficient: Rational64::from_integer(coefficient),
        choices,
    }
}

fn literal_terms(entries: &[(i64, &str)]) -> Vec<MerminTerm> {
    let mut terms: Vec<MerminTerm> = entries
        .iter()
        .map(|&(coefficient, pattern)| literal_term(coefficient, pattern))
        .collect();
    terms.sort_by(|a, b| a.choices.cmp(&b.choices));
    terms
}

fn symbolic_check(name: &str, got: &MerminPolynomial, expected: &[MerminTerm]) -> CheckResult {
    check(name.to_string(), 0.0, || {
        if got.terms() == expected {
            Ok((0.0, String::new()))
        } else {
            Ok((f64::INFINITY, format!("term mismatch: got {got}")))
        }
    })
}

// A'BC + AB'C + ABC' - A'B'C'
fn m3_literal() -> Vec<MerminTerm> {
    literal_terms(&[(1, "puu"), (1, "upu"), (1, "uup"), (-1, "ppp")])
}

// The sixteen-term expansion of 2 M4 = M3 (D + D') + M3' (D - D')
fn doubled_m4_literal() -> Vec<MerminTerm> {
    literal_terms(&[
        (1, "puuu"),
        (1, "puup"),
        (1, "upuu"),
        (1, "upup"),
        (1, "uupu"),
        (1, "uupp"),
        (-1, "pppu"),
        (-1, "pppp"),
        (1, "uppu"),
        (-1, "uppp"),
        (1, "pupu"),
        (-1, "pupp"),
        (1, "ppuu"),
        (-1, "ppup"),
        (-1, "uuuu"),
        (1, "uuup"),
    ])
}

const ALGEBRA_ANGLES: [f64; 5] = [0.0, 0.3, -0.7, PI / 4.0, 2.1];

fn algebra_check(setup: SetupKind, cutoff: usize) -> CheckResult {
    check(
        format!("operator-algebra {setup} cutoff-{cutoff}"),
        ALGEBRA_TOLERANCE,
        || {
            let report = verify_operator_algebra(setup, cutoff, &ALGEBRA_ANGLES)?;
            Ok((report.max_deviation(), String::new()))
        },
    )
}

struct OracleRoute {
    name: &'static str,
    kind: EntangledStateKind,
    setup: SetupKind,
}

const ORACLE_ROUTES: [OracleRoute; 4] = [
    OracleRoute {
        name: "oracle-vs-analytic sc setup-1",
        kind: EntangledStateKind::SqueezedCoherent,
        setup: SetupKind::ZerothBlock,
    },
    OracleRoute {
        name: "oracle-vs-analytic sc setup-2",
        kind: EntangledStateKind::SqueezedCoherent,
        setup: SetupKind::FullPseudospin,
    },
    OracleRoute {
        name: "oracle-vs-analytic ss setup-1",
        kind: EntangledStateKind::SqueezedSqueezed,
        setup: SetupKind::ZerothBlock,
    },
    OracleRoute {
        name: "oracle-vs-analytic ss setup-2",
        kind: EntangledStateKind::SqueezedSqueezed,
        setup: SetupKind::FullPseudospin,
    },
];

fn sample_spec(rng: &mut ChaCha8Rng, kind: EntangledStateKind) -> Result<EntangledStateSpec> {
    for _ in 0..1000 {
        let p1 = rng.gen_range(PARAM_RANGE);
        let p2 = rng.gen_range(PARAM_RANGE);
        let phi = rng.gen_range(0.0..TAU);
        let spec = match kind {
            EntangledStateKind::SqueezedCoherent => {
                EntangledStateSpec::squeezed_coherent(p1, p2, phi)?
            }
            EntangledStateKind::SqueezedSqueezed => {
                EntangledStateSpec::squeezed_squeezed(p1, p2, phi)?
            }
        };
        if spec.unnormalized_norm_sq() >= MIN_NORM_SQ {
            return Ok(spec);
        }
    }
    Err(Error::InvalidArgument(
        "could not sample a well-conditioned state".into(),
    ))
}

fn oracle_route_check(route: &OracleRoute, config: &VerifyConfig, seed: u64) -> CheckResult {
    check(route.name.to_string(), ORACLE_TOLERANCE, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = match route.kind {
            EntangledStateKind::SqueezedCoherent => 3,
            EntangledStateKind::SqueezedSqueezed => 4,
        };
        let mut max_deviation = 0.0f64;
        let mut worst_cutoff = 0;
        for _ in 0..config.samples {
            let spec = sample_spec(&mut rng, route.kind)?;
            let angles: Vec<f64> = (0..modes).map(|_| rng.gen_range(-PI..PI)).collect();
            let analytic = correlator_analytic(&spec, route.setup, &angles)?;
            let oracle = match config.cutoff {
                Some(cutoff) => correlator_oracle_with_cutoff(&spec, route.setup, &angles, cutoff),
                None => correlator_oracle(&spec, route.setup, &angles),
            }?;
            let deviation = (analytic.value - oracle.value).abs();
            if deviation > max_deviation {
                max_deviation = deviation;
                worst_cutoff = oracle.truncation_used;
            }
        }
        Ok((
            max_deviation,
            format!(
                "{} samples, worst at cutoff {}",
                config.samples, worst_cutoff
            ),
        ))
    })
}

/// Run every check. Errors out only on an unusable configuration; runtime
/// failures inside a check mark that check failed instead.
pub fn run_verification(config: &VerifyConfig) -> Result<VerificationReport> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument(
            "verification needs at least one sample per route".into(),
        ));
    }
    if let Some(cutoff) = config.cutoff {
        if cutoff < 2 || cutoff % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "forced cutoff must be an even integer >= 2, got {cutoff}"
            )));
        }
    }

    let mut checks = Vec::new();

    for cutoff in [8usize, 64] {
        checks.push(check(
            format!("pseudospin-algebra cutoff-{cutoff}"),
            ALGEBRA_TOLERANCE,
            || Ok((verify_pseudospin_algebra(cutoff)?, String::new())),
        ));
    }

    // One fixed small cutoff plus the adaptive cutoff of a strongly
    // squeezed state, so the identities are exercised at realistic size.
    let high_cutoff = EntangledStateSpec::squeezed_squeezed(0.9, 0.9, 0.0)
        .map(|spec| spec.adaptive_cutoff())
        .unwrap_or(64);
    for setup in [SetupKind::ZerothBlock, SetupKind::FullPseudospin] {
        checks.push(algebra_check(setup, 8));
        checks.push(algebra_check(setup, high_cutoff));
    }

    match build_mermin(3) {
        Ok(m3) => {
            checks.push(symbolic_check("mermin-recursion M3", &m3, &m3_literal()));
            match reduce_with_identity(&m3, &[2]) {
                Ok(reduced) => checks.push(check(
                    "mermin-reduction M3 -> M2".to_string(),
                    0.0,
                    || {
                        let m2 = build_mermin(2)?;
                        if reduced == m2 {
                            Ok((0.0, String::new()))
                        } else {
                            Ok((f64::INFINITY, format!("got {reduced}, want {m2}")))
                        }
                    },
                )),
                Err(error) => checks.push(check(
                    "mermin-reduction M3 -> M2".to_string(),
                    0.0,
                    move || Err(error),
                )),
            }
        }
        Err(error) => checks.push(check("mermin-recursion M3".to_string(), 0.0, move || {
            Err(error)
        })),
    }
    checks.push(check("mermin-recursion 2M4".to_string(), 0.0, || {
        let doubled = build_mermin(4)?.scaled(Rational64::from_integer(2));
        if doubled.terms() == doubled_m4_literal().as_slice() {
            Ok((0.0, String::new()))
        } else {
            Ok((f64::INFINITY, format!("term mismatch: got {doubled}")))
        }
    }));

    for (name, n, scale, expected) in [
        ("classical-bound M2", 2usize, 1i64, 2.0),
        ("classical-bound M3", 3, 1, 2.0),
        ("classical-bound 2M4", 4, 2, 4.0),
    ] {
        checks.push(check(name.to_string(), 0.0, move || {
            let poly = build_mermin(n)?.scaled(Rational64::from_integer(scale));
            let bound = classical_bound(&poly)?;
            Ok(((bound - expected).abs(), String::new()))
        }));
    }

    checks.push(check("quantum-bound".to_string(), 1e-12, || {
        let mut deviation = (quantum_bound(2)? - 2.0 * SQRT_2).abs();
        deviation = deviation.max((quantum_bound(3)? - 4.0).abs());
        deviation = deviation.max((2.0 * quantum_bound(4)? - 8.0 * SQRT_2).abs());
        Ok((deviation, String::new()))
    }));

    for (index, route) in ORACLE_ROUTES.iter().enumerate() {
        checks.push(oracle_route_check(
            route,
            config,
            config.seed.wrapping_add(index as u64),
        ));
    }

    Ok(VerificationReport {
        checks,
        samples: config.samples,
        seed: config.seed,
        forced_cutoff: config.cutoff,
    })
}
