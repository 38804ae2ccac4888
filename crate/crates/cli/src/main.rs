use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use secbf_core::experiment::{
    self, default_varpi_mw, summarize_sweep, write_convergence_csv, write_summary_csv, write_sweep_csv,
    DEFAULT_PMAX_DBM, DEFAULT_TRIALS,
};
use secbf_core::{emit_plots, ExperimentRecord, Settings, SystemConfig};

/// Secrecy beamforming experiments for a SWIPT femtocell.
#[derive(Parser, Debug)]
#[command(name = "secbf", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario TOML; the reference scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; defaults to the config's `rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Objective traces for several power budgets.
    Converge {
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Comma-separated budgets (dBm).
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PMAX_DBM)]
        pmax_dbm: Vec<f64>,
    },
    /// Proposed scheme against zero forcing over harvesting thresholds.
    Sweep {
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Comma-separated thresholds (mW); 0.25 to 2.5 in steps of 0.25 when omitted.
        #[arg(long, value_delimiter = ',')]
        varpi_mw: Vec<f64>,
        /// Power budget (dBm) overriding the config.
        #[arg(long)]
        pmax_dbm: Option<f64>,
    },
    /// Diagnostic report of one trial.
    Single {
        /// Power budget (dBm) overriding the config.
        #[arg(long)]
        pmax_dbm: Option<f64>,
        /// Harvesting threshold (mW) overriding the config.
        #[arg(long)]
        varpi_mw: Option<f64>,
    },
    /// SVG and gnuplot output for convergence or sweep CSVs.
    Plot {
        /// CSV files; `convergence.csv` and `sweep.csv` under the output
        /// directory when omitted.
        csv: Vec<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<SystemConfig> {
    match path {
        Some(p) => SystemConfig::from_file(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(SystemConfig::reference()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    info!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn median(mut xs: Vec<usize>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_unstable();
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] as f64 } else { (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0 })
}

fn report_convergence(records: &[ExperimentRecord], budgets: &[f64]) {
    println!("pmax_dbm trials feasible converged median_iterations mean_objective");
    for &p in budgets {
        let at: Vec<&ExperimentRecord> =
            records.iter().filter(|r| (r.pmax_dbm() - p).abs() < 1e-9).collect();
        let done: Vec<&&ExperimentRecord> = at.iter().filter(|r| r.feasible).collect();
        let converged = at.iter().filter(|r| !r.objective_trace.is_empty() && r.warning.is_none()).count();
        let iters = median(done.iter().map(|r| r.iterations).collect());
        let mean = (!done.is_empty())
            .then(|| done.iter().filter_map(|r| r.objective_trace.last()).sum::<f64>() / done.len() as f64);
        println!(
            "{p} {} {} {converged} {} {}",
            at.len(),
            done.len(),
            iters.map_or("-".into(), |m| m.to_string()),
            mean.map_or("-".into(), |m| format!("{m:.6}"))
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.common.config.as_deref())?;
    let seed = cli.common.seed.unwrap_or(cfg.rng_seed);
    let out = &cli.common.out;
    let settings = Settings::default();
    match cli.command {
        Command::Converge { trials, pmax_dbm } => {
            cfg.ensure_valid()?;
            let records = experiment::run_convergence(&cfg, &pmax_dbm, trials, seed, &settings);
            for r in records.iter().filter(|r| !r.feasible) {
                warn!("P_max {} dBm trial {}: {}", r.pmax_dbm(), r.trial, r.status);
            }
            write_convergence_csv(&records, create(out, "convergence.csv")?)?;
            report_convergence(&records, &pmax_dbm);
        }
        Command::Sweep { trials, varpi_mw, pmax_dbm } => {
            if let Some(p) = pmax_dbm {
                cfg = cfg.with_p_max_dbm(p);
            }
            cfg.ensure_valid()?;
            let grid = if varpi_mw.is_empty() { default_varpi_mw() } else { varpi_mw };
            let records = experiment::run_threshold_sweep(&cfg, &grid, trials, seed, &settings);
            write_sweep_csv(&records, create(out, "sweep.csv")?)?;
            let summary = summarize_sweep(&records);
            write_summary_csv(&summary, create(out, "sweep_summary.csv")?)?;
            println!("varpi_mw proposed_feasible proposed_mean zf_feasible zf_mean paired");
            let show = |m: Option<f64>| m.map_or("-".to_string(), |v| format!("{v:.6}"));
            for s in &summary {
                println!(
                    "{} {}/{} {} {}/{} {} {}",
                    s.varpi_mw,
                    s.proposed.feasible,
                    s.trials,
                    show(s.proposed.mean),
                    s.zf.feasible,
                    s.trials,
                    show(s.zf.mean),
                    s.paired
                );
            }
        }
        Command::Single { pmax_dbm, varpi_mw } => {
            if let Some(p) = pmax_dbm {
                cfg = cfg.with_p_max_dbm(p);
            }
            if let Some(v) = varpi_mw {
                cfg = cfg.with_eh_threshold(v);
            }
            // a deliberately broken scenario is still worth a report
            cfg.check_dimensions()?;
            for v in cfg.validate() {
                warn!("config: {v}");
            }
            let report = experiment::run_single(&cfg, seed, &settings);
            let name = format!("single_seed{seed}.txt");
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join(&name), &report)?;
            print!("{report}");
        }
        Command::Plot { csv } => {
            let inputs = if csv.is_empty() {
                let found: Vec<PathBuf> = ["convergence.csv", "sweep.csv"]
                    .iter()
                    .map(|n| out.join(n))
                    .filter(|p| p.exists())
                    .collect();
                if found.is_empty() {
                    bail!("no CSV given and none found in {}", out.display());
                }
                found
            } else {
                csv
            };
            let result = emit_plots(&inputs, out)?;
            for w in &result.warnings {
                warn!("{w}");
            }
            for f in &result.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    run(Cli::parse())
}
