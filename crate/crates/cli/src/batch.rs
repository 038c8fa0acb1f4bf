//! Seed batches: run, write traces and summaries, and echo the scenario.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use coexist_core::metrics::{cdf_csv, empirical_cdf, SUMMARY_HEADER};
use coexist_core::{run, summarize, RunMetrics, Scenario, TraceLog};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io, CliError};

/// Beacons the delay metric waits for.
pub const DEFAULT_K: u32 = 5;

pub const SCENARIO_FILE: &str = "scenario.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const RX_CDF_FILE: &str = "rx_interval_cdf.csv";

pub fn trace_file(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

/// What a batch directory was produced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchEcho {
    pub preset: Option<String>,
    pub seeds: Vec<u64>,
    pub k: u32,
    #[serde(default)]
    pub notes: Vec<String>,
    /// Scenario of every run, with `seed` replaced per run.
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub dir: PathBuf,
    pub runs: Vec<(u64, RunMetrics)>,
}

fn with_seed(s: &Scenario, seed: u64) -> Scenario {
    Scenario {
        seed,
        ..s.clone()
    }
}

/// Run `scenario` once per seed in parallel, keeping only the metrics.
pub fn run_seeds(scenario: &Scenario, seeds: &[u64], k: u32) -> Result<Vec<RunMetrics>, CliError> {
    scenario.validate()?;
    seeds
        .par_iter()
        .map(|&seed| {
            let trace = run(&with_seed(scenario, seed))?;
            summarize(&trace, k).map_err(|source| CliError::Metrics {
                path: PathBuf::from(format!("{}/seed {seed}", scenario.name)),
                source,
            })
        })
        .collect()
}

/// Run every seed and write `<out>/<name>/` with one trace per seed,
/// `summary.csv`, the pooled received-interval CDF and the scenario echo.
pub fn run_batch(echo: &BatchEcho, out: &Path) -> Result<BatchResult, CliError> {
    let s = &echo.scenario;
    s.validate()?;
    let dir = out.join(&s.name);
    fs::create_dir_all(&dir).map_err(io(&dir))?;

    let runs = echo
        .seeds
        .par_iter()
        .map(|&seed| {
            let trace = run(&with_seed(s, seed))?;
            let path = dir.join(trace_file(seed));
            let f = fs::File::create(&path).map_err(io(&path))?;
            trace.write_csv(BufWriter::new(f)).map_err(io(&path))?;
            let m = summarize(&trace, echo.k).map_err(|source| CliError::Metrics { path, source })?;
            log::debug!("{} seed {seed}: {:?}", s.name, m.reception_frac());
            Ok((seed, m))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for (seed, m) in &runs {
        summary.push_str(&m.summary_row(&s.name, *seed));
        summary.push('\n');
    }
    write(&dir.join(SUMMARY_FILE), &summary)?;

    let pooled: Vec<u64> = runs
        .iter()
        .flat_map(|(_, m)| m.rx_interval_samples_us.iter().copied())
        .collect();
    if let Ok(cdf) = empirical_cdf::<f64>(&pooled) {
        write(&dir.join(RX_CDF_FILE), &cdf_csv(&cdf))?;
    }

    let json = serde_json::to_string_pretty(echo).expect("scenario serializes");
    write(&dir.join(SCENARIO_FILE), &(json + "\n"))?;
    Ok(BatchResult { dir, runs })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io(path))
}

/// A plain scenario file, or a batch echo written by [`run_batch`].
pub fn load_config(path: &Path) -> Result<BatchEcho, CliError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    match Scenario::from_json(&text) {
        Ok(scenario) => Ok(BatchEcho {
            preset: None,
            seeds: vec![scenario.seed],
            k: DEFAULT_K,
            notes: Vec::new(),
            scenario,
        }),
        Err(plain) => serde_json::from_str::<BatchEcho>(&text).map_err(|_| CliError::Config {
            path: path.into(),
            source: plain,
        }),
    }
}

pub fn read_trace(path: &Path) -> Result<TraceLog, CliError> {
    let f = fs::File::open(path).map_err(io(path))?;
    TraceLog::read_csv(std::io::BufReader::new(f)).map_err(|source| CliError::Trace {
        path: path.into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::Preset;

    fn short(p: Preset) -> BatchEcho {
        BatchEcho {
            preset: Some(p.name().into()),
            seeds: vec![3, 1, 2],
            k: DEFAULT_K,
            notes: p.notes(),
            scenario: Scenario {
                duration_us: 2_000_000,
                ..p.scenario()
            },
        }
    }

    #[test]
    fn batch_layout() {
        let tmp = tempfile::tempdir().unwrap();
        let r = run_batch(&short(Preset::CaseD), tmp.path()).unwrap();
        assert_eq!(r.dir, tmp.path().join("case_d"));
        for seed in [1, 2, 3] {
            let t = read_trace(&r.dir.join(trace_file(seed))).unwrap();
            assert_eq!(summarize(&t, DEFAULT_K).unwrap(), r.runs.iter().find(|x| x.0 == seed).unwrap().1);
        }
        let summary = fs::read_to_string(r.dir.join(SUMMARY_FILE)).unwrap();
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(lines[0], SUMMARY_HEADER);
        assert!(lines[1].starts_with("case_d,3,"));
        assert_eq!(lines.len(), 4);
        let echo = load_config(&r.dir.join(SCENARIO_FILE)).unwrap();
        assert_eq!(echo, short(Preset::CaseD));
    }

    #[test]
    fn plain_scenario_config() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.json");
        fs::write(&path, r#"{"name": "quiet", "probe_rate_per_s": 0.0, "seed": 9}"#).unwrap();
        let echo = load_config(&path).unwrap();
        assert_eq!(echo.scenario.name, "quiet");
        assert_eq!(echo.seeds, vec![9]);
        fs::write(&path, r#"{"nmae": "typo"}"#).unwrap();
        assert!(matches!(load_config(&path), Err(CliError::Config { .. })));
    }
}
