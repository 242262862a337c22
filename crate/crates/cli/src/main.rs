mod config;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use config::Config;
use mermin_cv::{
    build_mermin, format_significant, max_violation, mermin_expectation, parse_angle, preset,
    quantum_bound, run_scan, run_verification, scan_bounds, scan_polynomial, write_csv, AxisSpec,
    EntangledStateKind, EntangledStateSpec, Error, EvaluationMethod, GridSpec, MeasurementAngles,
    MerminPolynomial, ScanRequest, SetupKind, VerifyConfig, PRESET_NAMES,
};

#[derive(Parser)]
#[command(
    name = "mermin-cv",
    version,
    about = "Mermin-inequality correlators for continuous-variable entangled states",
    after_help = "Angles accept pi-literals (pi, -pi/4, 3pi/4) or raw radians.\n\
                  Config files hold `key = value` lines mirroring the flag names;\n\
                  explicit flags override them."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Mermin expectation at a single parameter point
    Eval(EvalArgs),
    /// Sweep a parameter grid and write one CSV row per point
    Scan(ScanArgs),
    /// Find the grid point maximizing |<M>|
    #[command(name = "max-violation")]
    MaxViolation(MaxArgs),
    /// Run the invariant battery: operator algebra, recursion identities,
    /// bound enumeration, and oracle-vs-analytic sampling
    Verify(VerifyArgs),
    /// Print classical and quantum bounds for the n-party polynomial
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct StateArgs {
    /// State family: sc (squeezed-coherent, 3 modes) or ss (squeezed-squeezed, 4 modes)
    #[arg(long)]
    state: Option<String>,

    /// Bell setup: 1 (zeroth-block) or 2 (full pseudospin)
    #[arg(long)]
    setup: Option<u8>,

    /// Relative phase between the branches (pi-literal or radians)
    #[arg(long)]
    phi: Option<String>,

    /// Named angle set: sc-pi, sc-zero, ss-pi, ss-zero
    #[arg(long, conflicts_with = "angles")]
    preset: Option<String>,

    /// Explicit angles: comma-separated pi-literals, one (a, a') pair per
    /// party, e.g. "0,pi/2,-pi/4,pi/4,pi/4,-pi/4"
    #[arg(long)]
    angles: Option<String>,

    /// Config file with `key = value` lines mirroring the flag names
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    /// Coherent amplitude (sc states)
    #[arg(long)]
    alpha: Option<f64>,

    /// Squeezing parameter of the first branch
    #[arg(long)]
    eta: Option<f64>,

    /// Second squeezing parameter (ss states)
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct MethodArgs {
    /// Evaluation route: analytic or oracle
    #[arg(long)]
    method: Option<String>,

    /// Forced Fock cutoff for the oracle (even; default: adaptive)
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Grid shape: diagonal (param2 = param1 + offset) or rect
    #[arg(long)]
    grid: Option<String>,

    /// Diagonal: first value of param1
    #[arg(long)]
    min: Option<f64>,

    /// Diagonal: last value of param1 (inclusive up to step rounding)
    #[arg(long)]
    max: Option<f64>,

    /// Diagonal: param1 increment
    #[arg(long)]
    step: Option<f64>,

    /// Diagonal: param2 - param1
    #[arg(long)]
    offset: Option<f64>,

    /// Rect: axis-1 range and point count
    #[arg(long)]
    min1: Option<f64>,
    #[arg(long)]
    max1: Option<f64>,
    #[arg(long)]
    points1: Option<usize>,

    /// Rect: axis-2 range and point count
    #[arg(long)]
    min2: Option<f64>,
    #[arg(long)]
    max2: Option<f64>,
    #[arg(long)]
    points2: Option<usize>,

    /// Worker threads (default: MERMIN_CV_WORKERS, else one per core)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    grid: GridArgs,

    /// CSV destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MaxArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Forced oracle cutoff (even; default: adaptive per sampled state)
    #[arg(long)]
    cutoff: Option<usize>,

    /// Random tuples per correlator route
    #[arg(long)]
    samples: Option<usize>,

    /// RNG seed for the sampled tuples
    #[arg(long)]
    seed: Option<u64>,

    /// Config file with `key = value` lines mirroring the flag names
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Number of parties (2 ..= 6)
    n: usize,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Eval(args) => cmd_eval(args),
        Command::Scan(args) => cmd_scan(args),
        Command::MaxViolation(args) => cmd_max_violation(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bounds(args) => cmd_bounds(args),
    }
}

/// Everything `eval`, `scan` and `max-violation` share.
struct Resolved {
    kind: EntangledStateKind,
    setup: SetupKind,
    phi: f64,
    angles: MeasurementAngles,
    method: EvaluationMethod,
}

fn resolve_state(args: &StateArgs, method: &MethodArgs, config: &Config) -> Result<Resolved> {
    let kind = match config
        .merge(args.state.as_deref(), "state")
        .ok_or_else(|| anyhow!("--state is required (sc or ss)"))?
    {
        "sc" => EntangledStateKind::SqueezedCoherent,
        "ss" => EntangledStateKind::SqueezedSqueezed,
        other => bail!("--state must be sc or ss, got `{other}`"),
    };
    let setup_index = config
        .merge_parsed(args.setup, "setup")?
        .ok_or_else(|| anyhow!("--setup is required (1 or 2)"))?;
    let setup = SetupKind::from_index(setup_index)?;
    let phi = parse_angle(
        config
            .merge(args.phi.as_deref(), "phi")
            .ok_or_else(|| anyhow!("--phi is required (e.g. pi or 0)"))?,
    )?;
    let parties = match kind {
        EntangledStateKind::SqueezedCoherent => 3,
        EntangledStateKind::SqueezedSqueezed => 4,
    };
    let angles = resolve_angles(args, config, parties)?;
    let method = match config
        .merge(method.method.as_deref(), "method")
        .unwrap_or("analytic")
    {
        "analytic" => EvaluationMethod::Analytic,
        "oracle" => EvaluationMethod::Oracle,
        other => bail!("--method must be analytic or oracle, got `{other}`"),
    };
    Ok(Resolved {
        kind,
        setup,
        phi,
        angles,
        method,
    })
}

fn resolve_angles(args: &StateArgs, config: &Config, parties: usize) -> Result<MeasurementAngles> {
    if let Some(name) = config.merge(args.preset.as_deref(), "preset") {
        let angles = preset(name).ok_or_else(|| {
            anyhow!("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", "))
        })?;
        if angles.parties() != parties {
            bail!(
                "preset `{name}` covers {} parties but this state has {parties}",
                angles.parties()
            );
        }
        return Ok(angles);
    }
    let Some(raw) = config.merge(args.angles.as_deref(), "angles") else {
        bail!("either --preset or --angles is required");
    };
    let values: Vec<f64> = raw
        .split(',')
        .map(|token| parse_angle(token).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    if values.len() != 2 * parties {
        bail!(
            "--angles needs {} comma-separated values for {parties} parties (a, a' per party), got {}",
            2 * parties,
            values.len()
        );
    }
    let pairs = values.chunks(2).map(|pair| (pair[0], pair[1])).collect();
    Ok(MeasurementAngles::new(pairs)?)
}

fn resolve_spec(
    kind: EntangledStateKind,
    point: &PointArgs,
    phi: f64,
    config: &Config,
) -> Result<EntangledStateSpec> {
    let eta = config
        .merge_parsed(point.eta, "eta")?
        .ok_or_else(|| anyhow!("--eta is required"))?;
    let spec = match kind {
        EntangledStateKind::SqueezedCoherent => {
            let alpha = config
                .merge_parsed(point.alpha, "alpha")?
                .ok_or_else(|| anyhow!("--alpha is required for sc states"))?;
            EntangledStateSpec::squeezed_coherent(alpha, eta, phi)
        }
        EntangledStateKind::SqueezedSqueezed => {
            let sigma = config
                .merge_parsed(point.sigma, "sigma")?
                .ok_or_else(|| anyhow!("--sigma is required for ss states"))?;
            EntangledStateSpec::squeezed_squeezed(eta, sigma, phi)
        }
    };
    spec.map_err(diagnose)
}

/// Rewrites the degenerate-state error into an actionable diagnostic; other
/// library errors pass through unchanged.
fn diagnose(error: Error) -> anyhow::Error {
    match error {
        Error::DegenerateState { norm_sq, threshold } => anyhow!(
            "degenerate state: at phi = pi with equal parameters the two branches cancel \
             exactly, leaving nothing to normalize (unnormalized norm-squared {norm_sq:.3e} \
             < {threshold:.0e}); offset the parameters slightly instead, e.g. the default \
             scans keep the second parameter 0.001 above the first"
        ),
        other => anyhow::Error::from(other),
    }
}

fn polynomial_name(kind: EntangledStateKind) -> &'static str {
    match kind {
        EntangledStateKind::SqueezedCoherent => "M3",
        EntangledStateKind::SqueezedSqueezed => "2M4",
    }
}

fn param_names(kind: EntangledStateKind) -> (&'static str, &'static str) {
    match kind {
        EntangledStateKind::SqueezedCoherent => ("alpha", "eta"),
        EntangledStateKind::SqueezedSqueezed => ("eta", "sigma"),
    }
}

fn print_row(label: &str, value: impl std::fmt::Display) {
    println!("{label:<16} {value}");
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let config = Config::load(args.state.config.as_deref())?;
    let resolved = resolve_state(&args.state, &args.method, &config)?;
    let spec = resolve_spec(resolved.kind, &args.point, resolved.phi, &config)?;
    let poly: MerminPolynomial = scan_polynomial(resolved.kind);
    let bounds = scan_bounds(resolved.kind)?;

    let forced_cutoff = config.merge_parsed(args.method.cutoff, "cutoff")?;
    let result = match (resolved.method, forced_cutoff) {
        (EvaluationMethod::Oracle, Some(cutoff)) => {
            let mut value = 0.0;
            let mut worst_tail = 0.0f64;
            for term in poly.terms() {
                let angles = resolved.angles.for_choices(&term.choices)?;
                let r = mermin_cv::correlator_oracle_with_cutoff(
                    &spec,
                    resolved.setup,
                    &angles,
                    cutoff,
                )
                .map_err(diagnose)?;
                value += (*term.coefficient.numer() as f64 / *term.coefficient.denom() as f64)
                    * r.value;
                worst_tail = worst_tail.max(r.tail_estimate);
            }
            mermin_cv::CorrelatorResult {
                value,
                method: mermin_cv::Method::FockOracle,
                truncation_used: cutoff,
                tail_estimate: worst_tail,
            }
        }
        _ => mermin_expectation(
            &spec,
            resolved.setup,
            &poly,
            &resolved.angles,
            resolved.method,
        )
        .map_err(diagnose)?,
    };

    let (name1, name2) = param_names(resolved.kind);
    let (param1, param2) = display_params(&spec);
    print_row("state", state_name(resolved.kind));
    print_row("setup", resolved.setup);
    print_row("phi", format_significant(resolved.phi, 12));
    print_row(name1, format_significant(param1, 12));
    print_row(name2, format_significant(param2, 12));
    print_row("polynomial", polynomial_name(resolved.kind));
    print_row("value", format_significant(result.value, 12));
    print_row("|value|", format_significant(result.value.abs(), 12));
    print_row("method", result.method);
    print_row("truncation", result.truncation_used);
    print_row("tail estimate", format!("{:.3e}", result.tail_estimate));
    print_row("classical bound", bounds.classical);
    print_row("quantum bound", format_significant(bounds.quantum, 12));
    print_row("violated", result.value.abs() > bounds.classical);
    Ok(())
}

fn state_name(kind: EntangledStateKind) -> &'static str {
    match kind {
        EntangledStateKind::SqueezedCoherent => "sc (squeezed-coherent)",
        EntangledStateKind::SqueezedSqueezed => "ss (squeezed-squeezed)",
    }
}

/// (param1, param2) in scan order: (alpha, eta) for sc, (eta, sigma) for ss.
fn display_params(spec: &EntangledStateSpec) -> (f64, f64) {
    match spec.kind {
        EntangledStateKind::SqueezedCoherent => (spec.second_param, spec.eta),
        EntangledStateKind::SqueezedSqueezed => (spec.eta, spec.second_param),
    }
}

fn resolve_grid(args: &GridArgs, config: &Config) -> Result<GridSpec> {
    match config.merge(args.grid.as_deref(), "grid").unwrap_or("diagonal") {
        "diagonal" => {
            let GridSpec::Diagonal {
                min: dmin,
                max: dmax,
                step: dstep,
                offset: doffset,
            } = GridSpec::default_diagonal()
            else {
                unreachable!()
            };
            Ok(GridSpec::Diagonal {
                min: config.merge_parsed(args.min, "min")?.unwrap_or(dmin),
                max: config.merge_parsed(args.max, "max")?.unwrap_or(dmax),
                step: config.merge_parsed(args.step, "step")?.unwrap_or(dstep),
                offset: config.merge_parsed(args.offset, "offset")?.unwrap_or(doffset),
            })
        }
        "rect" => {
            let default_axis = AxisSpec {
                min: 0.001,
                max: 0.95,
                points: 200,
            };
            Ok(GridSpec::Rect {
                axis1: AxisSpec {
                    min: config.merge_parsed(args.min1, "min1")?.unwrap_or(default_axis.min),
                    max: config.merge_parsed(args.max1, "max1")?.unwrap_or(default_axis.max),
                    points: config
                        .merge_parsed(args.points1, "points1")?
                        .unwrap_or(default_axis.points),
                },
                axis2: AxisSpec {
                    min: config.merge_parsed(args.min2, "min2")?.unwrap_or(default_axis.min),
                    max: config.merge_parsed(args.max2, "max2")?.unwrap_or(default_axis.max),
                    points: config
                        .merge_parsed(args.points2, "points2")?
                        .unwrap_or(default_axis.points),
                },
            })
        }
        other => bail!("--grid must be diagonal or rect, got `{other}`"),
    }
}

fn build_request(
    state: &StateArgs,
    method: &MethodArgs,
    grid: &GridArgs,
    config: &Config,
) -> Result<(ScanRequest, Option<usize>)> {
    let resolved = resolve_state(state, method, config)?;
    let grid_spec = resolve_grid(grid, config)?;
    let workers = config.merge_parsed(grid.workers, "workers")?;
    Ok((
        ScanRequest {
            kind: resolved.kind,
            setup: resolved.setup,
            phi: resolved.phi,
            angles: resolved.angles,
            method: resolved.method,
            grid: grid_spec,
        },
        workers,
    ))
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let config = Config::load(args.state.config.as_deref())?;
    let (request, workers) = build_request(&args.state, &args.method, &args.grid, &config)?;
    let rows = run_scan(&request, workers)?;
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, std::io::BufWriter::new(file))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_max_violation(args: MaxArgs) -> Result<()> {
    let config = Config::load(args.state.config.as_deref())?;
    let (request, workers) = build_request(&args.state, &args.method, &args.grid, &config)?;
    let report = max_violation(&request, workers).map_err(|e| match e {
        Error::EmptyScan => anyhow!(
            "every grid point is degenerate (branches cancel); nothing to maximize"
        ),
        other => anyhow::Error::from(other),
    })?;
    let (name1, name2) = param_names(request.kind);
    let value = report.row.mermin_value.expect("max row is non-degenerate");
    print_row("polynomial", polynomial_name(request.kind));
    print_row(name1, format_significant(report.row.param1, 12));
    print_row(name2, format_significant(report.row.param2, 12));
    print_row("value", format_significant(value, 12));
    print_row("|value|", format_significant(value.abs(), 12));
    print_row("method", report.row.method);
    print_row("classical bound", report.bounds.classical);
    print_row("quantum bound", format_significant(report.bounds.quantum, 12));
    print_row(
        "gap to quantum",
        format_significant(report.bounds.quantum - value.abs(), 12),
    );
    print_row("violated", report.row.violated);
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let config = Config::load(args.config.as_deref())?;
    let defaults = VerifyConfig::default();
    let verify_config = VerifyConfig {
        cutoff: config.merge_parsed(args.cutoff, "cutoff")?,
        samples: config
            .merge_parsed(args.samples, "samples")?
            .unwrap_or(defaults.samples),
        seed: config.merge_parsed(args.seed, "seed")?.unwrap_or(defaults.seed),
    };
    let report = run_verification(&verify_config)?;
    println!(
        "{:<44} {:<6} {:>13} {:>10}",
        "check", "status", "max deviation", "tolerance"
    );
    for check in &report.checks {
        println!(
            "{:<44} {:<6} {:>13} {:>10}{}",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            format!("{:.3e}", check.max_deviation),
            format!("{:.0e}", check.tolerance),
            if check.detail.is_empty() {
                String::new()
            } else {
                format!("  ({})", check.detail)
            }
        );
    }
    println!(
        "\n{} checks, {} sampled tuples per route, seed {}",
        report.checks.len(),
        report.samples,
        report.seed
    );
    if !report.all_passed() {
        bail!("failing checks: {}", report.failed_names().join(", "));
    }
    println!("all checks passed");
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    if !(2..=6).contains(&args.n) {
        bail!("n must be between 2 and 6, got {}", args.n);
    }
    let poly = build_mermin(args.n)?;
    let bounds = poly.bound_pair()?;
    print_row("polynomial", format!("M{}", args.n));
    print_row("classical bound", bounds.classical);
    print_row("quantum bound", format_significant(bounds.quantum, 12));
    if args.n == 4 {
        // the four-party results are usually quoted for 2*M4
        println!();
        print_row("polynomial", "2M4");
        print_row("classical bound", 2.0 * bounds.classical);
        print_row(
            "quantum bound",
            format_significant(2.0 * quantum_bound(4)?, 12),
        );
    }
    Ok(())
}
