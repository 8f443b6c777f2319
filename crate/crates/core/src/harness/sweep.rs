use std::time::Instant;

use log::{debug, warn};
use rayon::prelude::*;

use super::rows::{ResultRow, SweepAxis};
use super::{ExperimentConfig, Method};
use crate::channel::{generate_population, SystemConfig};
use crate::error::Result;
use crate::rates::{rate_report, RateReport};
use crate::sca::{solve_joint, GreedyDesigner, ScaConfig, ScaPoint};
use crate::scheduling::schedule;
use crate::zf::zf_noma_rates;

/// Rate sums and bookkeeping of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub method: Method,
    pub sum_strong: f64,
    pub sum_weak: f64,
    pub wall_time_s: f64,
    pub sca_iterations: usize,
    pub error: Option<String>,
}

impl TrialOutcome {
    fn from_report(method: Method, rep: &RateReport, secs: f64, iterations: usize) -> Self {
        Self {
            method,
            sum_strong: rep.sum_strong(),
            sum_weak: rep.sum_weak(),
            wall_time_s: secs,
            sca_iterations: iterations,
            error: None,
        }
    }

    fn failed(method: Method, secs: f64, err: String) -> Self {
        Self { method, sum_strong: 0.0, sum_weak: 0.0, wall_time_s: secs, sca_iterations: 0, error: Some(err) }
    }
}

/// Population, scheduling with per-cluster SCA designs, then the requested
/// methods on the common cluster assignment. All rates use the exact
/// interference of the returned beams and powers.
pub fn run_trial(config: &SystemConfig, sca: &ScaConfig, seed: u64, methods: &[Method]) -> Vec<TrialOutcome> {
    let start = Instant::now();
    let scheduled = generate_population(config, seed).and_then(|pop| schedule(&pop, config, &GreedyDesigner { sca: *sca }));
    let schedule_secs = start.elapsed().as_secs_f64();
    let out = match scheduled {
        Ok(o) => o,
        Err(e) => {
            warn!("seed {seed}: scheduling failed: {e}");
            return methods.iter().map(|&m| TrialOutcome::failed(m, schedule_secs, e.to_string())).collect();
        }
    };
    let a = &out.assignment;
    methods
        .iter()
        .map(|&m| {
            let t = Instant::now();
            let res: Result<(RateReport, usize, f64)> = match m {
                Method::ThpGreedy => rate_report(a, &out.solution.beams, &out.solution.powers, config.noise_var, false)
                    .map(|r| (r, out.solution.iterations, schedule_secs)),
                Method::ThpJoint => ScaPoint::from_design(a, &out.solution.beams, &out.solution.powers)
                    .and_then(|init| solve_joint(a, config, sca, &init))
                    .and_then(|sol| {
                        let rep = rate_report(a, &sol.beams, &sol.powers, config.noise_var, false)?;
                        Ok((rep, out.solution.iterations + sol.iterations, schedule_secs))
                    }),
                Method::ZfBaseline => zf_noma_rates(a, config).map(|z| (z.rates, 0, 0.0)),
            };
            let secs = t.elapsed().as_secs_f64();
            match res {
                Ok((rep, iters, extra)) => {
                    debug!("seed {seed} {m}: weak {:.4} strong {:.4}", rep.sum_weak(), rep.sum_strong());
                    TrialOutcome::from_report(m, &rep, secs + extra, iters)
                }
                Err(e) => {
                    warn!("seed {seed} {m}: {e}");
                    TrialOutcome::failed(m, secs, e.to_string())
                }
            }
        })
        .collect()
}

fn to_row(o: TrialOutcome, axis: SweepAxis, value: f64, trial: usize, seed: u64, timed: bool) -> ResultRow {
    ResultRow {
        method: o.method,
        axis,
        sweep_value: value,
        trial,
        seed,
        sum_strong: o.sum_strong,
        sum_weak: o.sum_weak,
        sum_total: o.sum_strong + o.sum_weak,
        wall_time_s: timed.then_some(o.wall_time_s),
        sca_iterations: o.sca_iterations,
        status: o.error.map_or_else(|| "ok".to_string(), |e| format!("error: {e}")),
    }
}

fn sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    points: &[(f64, SystemConfig)],
    methods: &[Method],
) -> Vec<ResultRow> {
    let jobs: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    jobs.par_iter()
        .map(|&(p, trial)| {
            let (value, ref system) = points[p];
            let seed = cfg.seed(trial);
            run_trial(system, &cfg.sca, seed, methods)
                .into_iter()
                .map(|o| to_row(o, axis, value, trial, seed, cfg.record_wall_time))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Every SNR point times every trial, rows in (point, trial, method) order.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points: Vec<(f64, SystemConfig)> =
        cfg.snr_db.iter().map(|&s| (s, cfg.system.clone().with_snr_db(s))).collect();
    Ok(sweep(cfg, SweepAxis::SnrDb, &points, &cfg.methods))
}

/// Every `eta` of the grid at the fixed sweep SNR.
pub fn run_eta_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points: Vec<(f64, SystemConfig)> = cfg
        .eta_grid
        .iter()
        .map(|&eta| (eta, SystemConfig { eta, ..cfg.system.clone() }.with_snr_db(cfg.eta_sweep_snr_db)))
        .collect();
    Ok(sweep(cfg, SweepAxis::Eta, &points, &cfg.eta_methods))
}
