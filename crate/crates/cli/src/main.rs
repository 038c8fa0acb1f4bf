use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use coexist_cli::batch::{load_config, run_batch, BatchEcho, DEFAULT_K};
use coexist_cli::preset::{resolve, Preset};
use coexist_cli::{table, validate};
use coexist_core::analytic::TABLE3_GRID;
use coexist_core::stats::median;
use coexist_core::{DutyCycle, PhyParams};

#[derive(Parser)]
#[command(name = "coexist", version, about = "LTE-U / Wi-Fi coexistence simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a preset or a scenario file over a batch of seeds.
    Run {
        /// case_a .. case_g, or custom.
        #[arg(required_unless_present = "config", conflicts_with = "config")]
        preset: Option<String>,
        /// Scenario JSON, or a scenario.json echo from an earlier batch.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of seeds, counted up from the scenario's seed.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long)]
        probe_rate: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Closed-form drop probability and delay as CSV.
    Analytic {
        #[arg(long, default_value_t = DEFAULT_K)]
        k: u32,
        #[arg(long, requires = "t_off", conflicts_with = "grid")]
        t_on: Option<u64>,
        #[arg(long, requires = "t_on")]
        t_off: Option<u64>,
        /// Named grid; only `table3` exists.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Check completed batches under DIR.
    Validate {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run_cmd(
    preset: Option<String>,
    config: Option<PathBuf>,
    seeds: Option<u64>,
    duration_s: Option<f64>,
    probe_rate: Option<f64>,
    out: PathBuf,
) -> Result<()> {
    let mut echo = match (preset, config) {
        (_, Some(path)) => load_config(&path)?,
        (Some(name), None) => {
            let notes = name.parse::<Preset>().map(Preset::notes).unwrap_or_default();
            let scenario = resolve(&name)?;
            BatchEcho {
                preset: (name != "custom").then_some(name),
                seeds: (0..20).collect(),
                k: DEFAULT_K,
                notes,
                scenario,
            }
        }
        (None, None) => bail!("give a preset or --config"),
    };
    if let Some(n) = seeds {
        let first = echo.seeds.first().copied().unwrap_or(echo.scenario.seed);
        echo.seeds = (first..first + n).collect();
    }
    if let Some(d) = duration_s {
        if !(d.is_finite() && d > 0.0) {
            bail!("--duration-s must be positive");
        }
        echo.scenario.duration_us = (d * 1e6).round() as u64;
    }
    if let Some(r) = probe_rate {
        echo.scenario.probe_rate_per_s = r;
    }
    log::info!(
        "running {} over {} seeds into {}",
        echo.scenario.name,
        echo.seeds.len(),
        out.display()
    );
    let r = run_batch(&echo, &out)?;
    let fracs: Vec<f64> = r.runs.iter().filter_map(|(_, m)| m.reception_frac()).collect();
    let delays: Vec<f64> = r
        .runs
        .iter()
        .filter_map(|(_, m)| m.delay_to_k_us.map(|d| d as f64))
        .collect();
    let backs: Vec<f64> = r
        .runs
        .iter()
        .filter_map(|(_, m)| m.scale_back_time_us.map(|d| d as f64))
        .collect();
    println!("{}: {} runs in {}", echo.scenario.name, r.runs.len(), r.dir.display());
    if let Some(m) = median(&fracs) {
        println!("  median reception_frac {m:.4}");
    }
    if let Some(m) = median(&delays) {
        println!("  median delay_to_k {:.3} ms ({} runs)", m / 1e3, delays.len());
    }
    if let Some(m) = median(&backs) {
        println!("  median scale_back {:.3} ms ({} runs)", m / 1e3, backs.len());
    }
    Ok(())
}

fn analytic_cmd(k: u32, t_on: Option<u64>, t_off: Option<u64>, grid: Option<String>) -> Result<()> {
    let dcs: Vec<DutyCycle> = match (t_on, t_off, grid.as_deref()) {
        (Some(on), Some(off), None) => vec![DutyCycle::new(on, off)?],
        (None, None, Some("table3")) | (None, None, None) => TABLE3_GRID.to_vec(),
        (_, _, Some(g)) => bail!("unknown grid `{g}` (expected table3)"),
        _ => bail!("give --t-on and --t-off together"),
    };
    let rows = table::rows(&dcs, &PhyParams::table1(), k)?;
    print!("{}", table::to_csv(&rows));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let res = match Cli::parse().cmd {
        Cmd::Run {
            preset,
            config,
            seeds,
            duration_s,
            probe_rate,
            out,
        } => run_cmd(preset, config, seeds, duration_s, probe_rate, out),
        Cmd::Analytic { k, t_on, t_off, grid } => analytic_cmd(k, t_on, t_off, grid),
        Cmd::Validate { out } => validate::validate(&out)
            .with_context(|| format!("validating {}", out.display()))
            .map(|r| print!("{r}")),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
