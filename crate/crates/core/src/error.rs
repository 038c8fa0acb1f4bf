use thiserror::Error;

/// Invalid scenario or parameter set, reported before any simulation work.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
    #[error("contention window {0} must be a power of two and at least 2")]
    ContentionWindow(u32),
    #[error("ON duration {0} µs outside (0, 20000]")]
    OnDuration(u64),
    #[error("OFF duration {0} µs below the 1000 µs minimum")]
    OffDuration(u64),
    #[error("CSAT needs n_windows >= k_required >= 1 (got N = {n}, K = {k})")]
    CsatWindows { n: u32, k: u32 },
    #[error("CSAT high duty cycle {high} must occupy more airtime than low duty cycle {low}")]
    CsatOrdering { high: String, low: String },
    #[error("scenario has no transmitter enabled")]
    NoTransmitter,
    #[error("link power {0} dBm is not finite")]
    LinkPower(f64),
    #[error("node {0} does not exist in this scenario")]
    UnknownNode(u32),
    #[error("probe rate {0} must be finite and non-negative")]
    ProbeRate(f64),
    #[error("lte phase {phase} µs must lie inside the first cycle of {cycle} µs")]
    LtePhase { phase: u64, cycle: u64 },
    #[error("{associating} associating clients requested but only {clients} clients exist")]
    AssociatingClients { associating: u32, clients: u32 },
    #[error("{0} must be finite")]
    NotFinite(&'static str),
}

/// The closed-form model is only defined while the drop probability stays
/// below one.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("beacon drop probability {0} >= 1: cycle too short for the beacon airtime")]
    OutOfRange(f64),
    #[error("success interval index must be >= 1")]
    ZeroIndex,
    #[error("probability {0} outside [0, 1)")]
    Probability(f64),
    #[error("K must be >= 1")]
    ZeroK,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsatError {
    #[error("observation round already holds {0} windows")]
    RoundOverflow(u32),
    #[error("decision requested after {observed} of {required} windows")]
    CalledEarly { observed: u32, required: u32 },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("trace header mismatch: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trace row {row} at t = {t_us} µs precedes the previous row at {prev_us} µs")]
    OutOfOrder { row: usize, t_us: u64, prev_us: u64 },
    #[error("cannot build a CDF from zero samples")]
    EmptySamples,
    #[error("only {found} detected beacons after the first attempt; {required} needed")]
    InsufficientDetections { found: usize, required: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("chi-square test left with {0} bins after pooling; need at least 2")]
    TooFewBins(usize),
}
