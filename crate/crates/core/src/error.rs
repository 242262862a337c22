use thiserror::Error;

/// Errors produced by state construction, operator application, and scans.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its admissible domain.
    #[error("invalid parameter `{name}`: {value} ({requirement})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A structural argument (cutoff, mode index, party count) is inconsistent.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The two branches of an entangled superposition cancel: the squared
    /// norm of the unnormalized state fell below the degeneracy threshold.
    /// Happens when both parameters coincide and the relative phase is pi.
    #[error(
        "degenerate state: unnormalized squared norm {norm_sq:.3e} below {threshold:.0e} \
         (the two branches cancel, e.g. equal parameters with phi = pi)"
    )]
    DegenerateState { norm_sq: f64, threshold: f64 },

    /// The requested Fock cutoff leaves too much probability mass in the tail.
    #[error(
        "cutoff {cutoff} insufficient: single-branch tail mass {tail:.3e} exceeds {tolerance:.0e}"
    )]
    Truncation {
        cutoff: usize,
        tail: f64,
        tolerance: f64,
    },

    /// Two kets with different mode counts or cutoffs were combined.
    #[error("shape mismatch: ({modes_a} modes, cutoff {cutoff_a}) vs ({modes_b} modes, cutoff {cutoff_b})")]
    ShapeMismatch {
        modes_a: usize,
        cutoff_a: usize,
        modes_b: usize,
        cutoff_b: usize,
    },

    /// Exhaustive local-hidden-variable enumeration is limited to small n.
    #[error("classical bound enumeration unsupported for n = {n} parties (max {max}: 4^n assignments)")]
    EnumerationTooLarge { n: usize, max: usize },

    /// A scan whose grid points are all degenerate has no result to report.
    #[error("empty result: every grid point is degenerate")]
    EmptyScan,

    /// Scan grid validation failed.
    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
