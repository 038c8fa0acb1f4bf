//! Pass/fail report over completed batches, plus the individual checks the
//! acceptance suite reuses.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use coexist_core::analytic::{beacon_drop_probability, expected_delay_k_beacons, TABLE3_GRID};
use coexist_core::stats::{binomial_bound, geometric_gof, mann_whitney_greater, median};
use coexist_core::{run, AccessMode, DutyCycle, LteMode, PhyParams, RunMetrics, Scenario};

use crate::batch::{load_config, read_trace, trace_file, BatchEcho, SCENARIO_FILE};
use crate::error::{io, CliError};
use crate::preset::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn info(name: impl Into<String>, detail: String) -> Self {
        Self {
            name: name.into(),
            status: Status::Info,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.status, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Reference delays for K = 5 at the three table duty cycles, in ms.
pub const TABLE3_REFERENCE_MS: [(DutyCycle, f64); 3] = [
    (DutyCycle::PCT95, 522.76),
    (DutyCycle::PCT80, 521.0),
    (DutyCycle::PCT50_SHORT, 535.12),
];
/// Value printed in the measurement table for 5/5 ms, which the closed form
/// does not reproduce.
pub const PRINTED_5_5_MS: f64 = 535.62;

pub fn table3_checks() -> Vec<Check> {
    let phy = PhyParams::table1();
    let mut out = Vec::new();
    debug_assert_eq!(TABLE3_GRID.len(), TABLE3_REFERENCE_MS.len());
    for (dc, want) in TABLE3_REFERENCE_MS {
        let got = expected_delay_k_beacons::<f64>(&dc, &phy, 5)
            .map(|r| r.delay_us / 1_000.0)
            .unwrap_or(f64::NAN);
        out.push(Check::new(
            format!("analytic delay {dc}"),
            (got - want).abs() <= 0.05,
            format!("{got:.3} ms vs {want} ms (tol 0.05 ms)"),
        ));
    }
    let r = expected_delay_k_beacons::<f64>(&DutyCycle::PCT50_SHORT, &phy, 5)
        .map(|r| r.delay_us / 1_000.0)
        .unwrap_or(f64::NAN);
    out.push(Check::info(
        "analytic delay 5/5 ms vs printed table",
        format!(
            "closed form gives {r:.2} ms; the printed value {PRINTED_5_5_MS} ms differs by {:.2} ms",
            PRINTED_5_5_MS - r
        ),
    ));
    out
}

/// Empirical drop fraction against the closed form, 4 sigma.
pub fn drop_check(name: &str, dc: &DutyCycle, dropped: u64, attempts: u64) -> Check {
    let p_d: f64 = beacon_drop_probability(dc, &PhyParams::table1()).unwrap_or(f64::NAN);
    if attempts == 0 {
        return Check::new(name, false, "no beacon attempts".into());
    }
    let emp = dropped as f64 / attempts as f64;
    let bound = binomial_bound(p_d, attempts, 4.0);
    Check::new(
        name,
        (emp - p_d).abs() <= bound,
        format!(
            "p_d {emp:.6} vs {p_d:.6}, |diff| {:.6} <= {bound:.6} (4 sigma, n = {attempts})",
            (emp - p_d).abs()
        ),
    )
}

/// Mean delay to K detections within `rel_tol` of the closed form.
pub fn delay_check(name: &str, dc: &DutyCycle, k: u32, delays_us: &[u64], rel_tol: f64) -> Check {
    let want = expected_delay_k_beacons::<f64>(dc, &PhyParams::table1(), k)
        .map(|r| r.delay_us)
        .unwrap_or(f64::NAN);
    if delays_us.is_empty() {
        return Check::new(name, false, "no run reached K detections".into());
    }
    let mean = delays_us.iter().map(|&d| d as f64).sum::<f64>() / delays_us.len() as f64;
    let rel = (mean - want).abs() / want;
    Check::new(
        name,
        rel <= rel_tol,
        format!(
            "mean {:.3} ms vs {:.3} ms, rel diff {:.4} (tol {rel_tol}, n = {})",
            mean / 1e3,
            want / 1e3,
            rel,
            delays_us.len()
        ),
    )
}

/// Success intervals against the geometric law at significance `alpha`.
pub fn geometric_check(name: &str, dc: &DutyCycle, intervals: &[u64], alpha: f64) -> Check {
    let p_d: f64 = beacon_drop_probability(dc, &PhyParams::table1()).unwrap_or(f64::NAN);
    match geometric_gof(intervals, p_d) {
        Ok(r) => Check::new(
            name,
            r.p_value >= alpha,
            format!(
                "chi2 {:.3}, dof {}, p {:.4} (alpha {alpha}, n = {})",
                r.statistic,
                r.dof,
                r.p_value,
                intervals.len()
            ),
        ),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

/// Reception fractions per preset, one per seed.
pub type Receptions = BTreeMap<Preset, Vec<f64>>;

fn med(r: &Receptions, p: Preset) -> Option<f64> {
    r.get(&p).and_then(|v| median(v))
}

/// Median-ordering checks over whichever presets are present.
pub fn reception_checks(r: &Receptions) -> Vec<Check> {
    use Preset::*;
    let mut out = Vec::new();
    for (p, v) in r {
        if let Some(m) = median(v) {
            out.push(Check::info(
                format!("median reception {p}"),
                format!("{:.2}% over {} seeds", 100.0 * m, v.len()),
            ));
        }
    }
    let pct = |x: f64| 100.0 * x;
    for (hi, lo) in [(CaseA, CaseD), (CaseE, CaseD), (CaseF, CaseG)] {
        if let (Some(a), Some(b)) = (med(r, hi), med(r, lo)) {
            let mw = mann_whitney_greater(&r[&hi], &r[&lo])
                .map(|m| format!(", Mann-Whitney p {:.3}", m.p_value))
                .unwrap_or_default();
            out.push(Check::new(
                format!("reception {hi} > {lo}"),
                a > b,
                format!("medians {:.2}% vs {:.2}%{mw}", pct(a), pct(b)),
            ));
        }
    }
    let bce: Vec<f64> = [CaseB, CaseC, CaseE].iter().filter_map(|&p| med(r, p)).collect();
    if bce.len() == 3 {
        let spread = bce.iter().cloned().fold(f64::MIN, f64::max) - bce.iter().cloned().fold(f64::MAX, f64::min);
        out.push(Check::new(
            "reception case_b ~ case_c ~ case_e",
            spread <= 0.05,
            format!("spread {:.2} pp (tol 5 pp)", pct(spread)),
        ));
    }
    if let Some(d) = med(r, CaseD) {
        out.push(Check::new(
            "reception case_d in [55%, 80%]",
            (0.55..=0.80).contains(&d),
            format!("median {:.2}%", pct(d)),
        ));
    }
    out
}

/// Scale-back time with runs that never scaled back censored at the horizon.
pub fn scale_back_samples(runs: &[RunMetrics], horizon_us: u64) -> Vec<f64> {
    runs.iter()
        .map(|m| m.scale_back_time_us.unwrap_or(horizon_us) as f64)
        .collect()
}

pub fn scale_back_check(f: &[f64], g: &[f64]) -> Check {
    let name = "scale-back case_g > case_f";
    match mann_whitney_greater(g, f) {
        Ok(m) => Check::new(
            name,
            m.p_value < 0.05,
            format!(
                "medians {:.1} ms vs {:.1} ms, Mann-Whitney p {:.4} (alpha 0.05, n = {}/{})",
                median(g).unwrap_or(f64::NAN) / 1e3,
                median(f).unwrap_or(f64::NAN) / 1e3,
                m.p_value,
                g.len(),
                f.len()
            ),
        ),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

fn beacon_only(s: &Scenario) -> bool {
    s.probe_rate_per_s == 0.0 && !s.second_ap_enabled && s.wifi_ap_enabled
}

struct Batch {
    echo: BatchEcho,
    runs: Vec<RunMetrics>,
}

fn load_batch(dir: &Path) -> Result<Batch, CliError> {
    let echo = load_config(&dir.join(SCENARIO_FILE))?;
    let mut runs = Vec::with_capacity(echo.seeds.len());
    for &seed in &echo.seeds {
        let path = dir.join(trace_file(seed));
        if !path.exists() {
            return Err(CliError::MissingRun {
                dir: dir.into(),
                what: trace_file(seed),
            });
        }
        let t = read_trace(&path)?;
        runs.push(
            coexist_core::summarize(&t, echo.k)
                .map_err(|source| CliError::Metrics { path, source })?,
        );
    }
    Ok(Batch { echo, runs })
}

fn batch_checks(dir: &Path, b: &Batch) -> Result<Vec<Check>, CliError> {
    let s = &b.echo.scenario;
    let name = &s.name;
    let mut out = Vec::new();

    let fracs: Vec<f64> = b.runs.iter().filter_map(|m| m.reception_frac()).collect();
    out.push(Check::info(
        format!("{name} runs"),
        format!(
            "{} seeds, median reception {:.2}%",
            b.runs.len(),
            100.0 * median(&fracs).unwrap_or(f64::NAN)
        ),
    ));

    if let Some(&seed) = b.echo.seeds.first() {
        let path = dir.join(trace_file(seed));
        let on_disk = fs::read_to_string(&path).map_err(io(&path))?;
        let again = run(&Scenario { seed, ..s.clone() })?.to_csv_string();
        out.push(Check::new(
            format!("{name} determinism"),
            on_disk == again,
            format!("seed {seed} re-run {} the stored trace", if on_disk == again { "matches" } else { "differs from" }),
        ));
    }

    if beacon_only(s) && s.lte_mode == LteMode::Off {
        let all = b.runs.iter().all(|m| m.reception_frac() == Some(1.0));
        out.push(Check::new(
            format!("{name} empty channel"),
            all,
            format!("reception_frac == 1.0 in {}/{} runs", b.runs.iter().filter(|m| m.reception_frac() == Some(1.0)).count(), b.runs.len()),
        ));
    }

    if let (true, LteMode::Fixed(dc)) = (beacon_only(s), s.lte_mode) {
        let dropped: u64 = b.runs.iter().map(|m| m.beacons_dropped_on).sum();
        let attempts: u64 = b.runs.iter().map(|m| m.beacons_completed()).sum();
        let mode = match s.access_mode {
            AccessMode::Dcf => "dcf",
            AccessMode::SlottedImmediate => "slotted",
        };
        let mut c = drop_check(&format!("{name} drop fraction ({mode})"), &dc, dropped, attempts);
        if attempts < 100_000 {
            c.status = Status::Info;
            c.detail += "; at least 100000 attempts needed for a verdict";
        }
        out.push(c);

        let delays: Vec<u64> = b.runs.iter().filter_map(|m| m.delay_to_k_us).collect();
        let mut c = delay_check(&format!("{name} mean delay to K"), &dc, b.echo.k, &delays, 0.02);
        if delays.len() < 1_000 {
            c.status = Status::Info;
            c.detail += "; at least 1000 seeds needed for a verdict";
        }
        out.push(c);

        let intervals: Vec<u64> = b
            .runs
            .iter()
            .flat_map(|m| m.success_intervals(s.phy.beacon_interval_us))
            .collect();
        let mut c = geometric_check(&format!("{name} geometric intervals"), &dc, &intervals, 0.01);
        if intervals.len() < 10_000 {
            c.status = Status::Info;
            c.detail += "; at least 10000 intervals needed for a verdict";
        }
        out.push(c);
    }
    Ok(out)
}

/// Scan `out` for batch directories and check everything that applies.
pub fn validate(out: &Path) -> Result<Report, CliError> {
    let mut dirs: Vec<_> = fs::read_dir(out)
        .map_err(io(out))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SCENARIO_FILE).is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::NoRuns(out.into()));
    }

    let mut report = Report {
        checks: table3_checks(),
    };
    let mut receptions = Receptions::new();
    let mut scale_back: BTreeMap<Preset, Vec<f64>> = BTreeMap::new();
    for dir in &dirs {
        let b = load_batch(dir)?;
        log::info!("validating {}", dir.display());
        report.checks.extend(batch_checks(dir, &b)?);
        if let Some(p) = b.echo.preset.as_deref().and_then(|n| n.parse::<Preset>().ok()) {
            receptions.insert(p, b.runs.iter().filter_map(|m| m.reception_frac()).collect());
            if matches!(b.echo.scenario.lte_mode, LteMode::Csat(_)) {
                scale_back.insert(p, scale_back_samples(&b.runs, b.echo.scenario.duration_us));
            }
        }
    }
    report.checks.extend(reception_checks(&receptions));
    if let (Some(f), Some(g)) = (scale_back.get(&Preset::CaseF), scale_back.get(&Preset::CaseG)) {
        report.checks.push(scale_back_check(f, g));
    }
    Ok(report)
}
