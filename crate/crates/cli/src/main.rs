//! Batch driver for the THP-NOMA experiments. Writes CSV to `--out`, the
//! config's `output`, or stdout. Log verbosity comes from `RUST_LOG`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use thpnoma::harness::{
    run_eta_sweep, run_rate_sweep, run_symbol_check, write_rows, write_symbol_rows, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "thpnoma", version, about = "THP-precoded MISO NOMA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum rates of every method over the SNR grid.
    RateSweep(Common),
    /// Strong/weak sum-rate pairs over the eta grid at a fixed SNR.
    EtaSweep(Common),
    /// Noiseless (or AWGN) symbol-level THP simulation.
    SymbolCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; trial `t` uses `seed + t`.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sink(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::RateSweep(c) => {
            let cfg = c.resolve()?;
            let rows = run_rate_sweep(&cfg)?;
            info!("{} rows, {} failed trials", rows.len(), rows.iter().filter(|r| !r.ok()).count());
            write_rows(sink(&cfg)?, &rows)?;
        }
        Command::EtaSweep(c) => {
            let cfg = c.resolve()?;
            let rows = run_eta_sweep(&cfg)?;
            info!("{} rows, {} failed trials", rows.len(), rows.iter().filter(|r| !r.ok()).count());
            write_rows(sink(&cfg)?, &rows)?;
        }
        Command::SymbolCheck(c) => {
            let cfg = c.resolve()?;
            let reports = run_symbol_check(&cfg)?;
            let strong: usize = reports.iter().map(|r| r.strong_errors).sum();
            info!("{} trials, {strong} strong-user symbol errors", reports.len());
            write_symbol_rows(sink(&cfg)?, &reports)?;
        }
    }
    Ok(())
}
