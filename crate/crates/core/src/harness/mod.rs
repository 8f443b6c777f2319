//! Seeded Monte-Carlo experiments over the design methods, with CSV output.
//!
//! Every trial derives its seed as `base_seed + trial`, owns its RNG and
//! optimizer state, and may run on any rayon worker; rows are collected in
//! job order so the output depends only on the configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::sca::ScaConfig;

mod rows;
mod sweep;
mod symbol;

pub use rows::{write_rows, write_symbol_rows, ResultRow, SweepAxis, CSV_SCHEMA, SYMBOL_CSV_SCHEMA};
pub use sweep::{run_eta_sweep, run_rate_sweep, run_trial, TrialOutcome};
pub use symbol::{run_symbol_check, run_symbol_trial, SymbolReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ThpJoint,
    ThpGreedy,
    ZfBaseline,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ThpJoint, Method::ThpGreedy, Method::ZfBaseline];

    pub fn name(self) -> &'static str {
        match self {
            Method::ThpJoint => "thp-joint",
            Method::ThpGreedy => "thp-greedy",
            Method::ZfBaseline => "zf-baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Beam design used by the symbol-level simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolDesign {
    /// Sequential per-cluster SCA designs from the scheduler.
    Greedy,
    /// Joint SCA design started from the greedy one.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SymbolConfig {
    /// Frames per trial; each frame carries one symbol pair per cluster.
    pub frames: usize,
    /// QAM order of both users' data.
    pub qam_order: usize,
    /// Design SNR `10 log10(P / sigma^2)` in dB.
    pub snr_db: f64,
    /// Add complex AWGN of variance `noise_var` at every receiver.
    pub awgn: bool,
    pub design: SymbolDesign,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self { frames: 10_000, qam_order: 4, snr_db: 15.0, awgn: false, design: SymbolDesign::Greedy }
    }
}

/// Experiment description, read from JSON. Missing keys take their defaults;
/// the system parameters sit at the top level next to the sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub system: SystemConfig,
    /// SNR points (dB) of the rate sweep.
    pub snr_db: Vec<f64>,
    /// `eta` values of the trade-off sweep.
    pub eta_grid: Vec<f64>,
    /// Fixed SNR (dB) of the trade-off sweep.
    pub eta_sweep_snr_db: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// Methods emitted by the rate sweep.
    pub methods: Vec<Method>,
    /// Methods emitted by the trade-off sweep.
    pub eta_methods: Vec<Method>,
    pub output: Option<PathBuf>,
    /// Fill the wall-time column. Off by default so that output bytes depend
    /// only on the configuration.
    pub record_wall_time: bool,
    pub sca: ScaConfig,
    pub symbol: SymbolConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            eta_grid: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            eta_sweep_snr_db: 15.0,
            trials: 20,
            base_seed: 1,
            methods: Method::ALL.to_vec(),
            eta_methods: vec![Method::ThpJoint, Method::ZfBaseline],
            output: None,
            record_wall_time: false,
            sca: ScaConfig::default(),
            symbol: SymbolConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.sca.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.snr_db) || !self.eta_sweep_snr_db.is_finite() || !self.symbol.snr_db.is_finite() {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        if let Some(e) = self.eta_grid.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Config(format!("eta grid value {e} outside (0, 1]")));
        }
        if self.symbol.frames == 0 {
            return Err(Error::Config("symbol check needs at least one frame".into()));
        }
        Ok(())
    }

    /// Seed of trial `trial`.
    pub fn seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}
