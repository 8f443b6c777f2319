//! The SCA iteration: solve the convex approximation, move toward its
//! solution, re-expand, until the objective stops improving.

use std::io::Write;

use serde::Serialize;

use super::program::{build_p1, build_p2, ScaProgram};
use super::{verify_original_feasibility, BeamPowerSolution, ScaConfig, ScaPoint};
use crate::channel::{inner, proj_complement, CVector, SystemConfig};
use crate::conic::{solve, SolveStatus};
use crate::error::{Error, Result};
use crate::rates::{
    greedy_interference_bound, interference_upper_bound, weak_rate_given, GreedyView, PowerSplit,
};
use crate::scheduling::{ClusterAssignment, ClusterBeamDesigner, GreedyDesign, GreedyProblem};

/// Relative slack allowed when checking the strong-SNR floor of a starting point.
const START_FEAS_TOL: f64 = 1e-6;
/// Looser subproblem tolerance used for a single retry.
const RETRY_FACTOR: f64 = 100.0;
/// Largest relative duality gap of a primal-feasible subproblem point that
/// is still used as the next candidate when the solver stalls.
const INEXACT_GAP: f64 = 1e-4;
/// Violation bound every returned joint solution must meet.
const RESULT_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub step_norm: f64,
}

/// Tab-separated iteration trace with a header line.
pub fn write_trace<W: Write>(records: &[IterationRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration\tobjective\tmax_violation\tstep_norm")?;
    for r in records {
        writeln!(out, "{}\t{:.12e}\t{:.6e}\t{:.6e}", r.iteration, r.objective, r.max_violation, r.step_norm)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Design {
    beams: Vec<CVector>,
    powers: Vec<PowerSplit>,
}

impl Design {
    fn distance(&self, other: &Design) -> f64 {
        let mut s = 0.0;
        for (a, b) in self.beams.iter().zip(&other.beams) {
            s += (a - b).norm_squared();
        }
        for (a, b) in self.powers.iter().zip(&other.powers) {
            s += (a.strong - b.strong).powi(2) + (a.weak - b.weak).powi(2);
        }
        s.sqrt()
    }

    fn toward(&self, target: &Design, step: f64) -> Design {
        Design {
            beams: self.beams.iter().zip(&target.beams).map(|(a, b)| a.scale(1.0 - step) + b.scale(step)).collect(),
            powers: self
                .powers
                .iter()
                .zip(&target.powers)
                .map(|(a, b)| {
                    PowerSplit::new(a.strong + step * (b.strong - a.strong), a.weak + step * (b.weak - a.weak))
                })
                .collect(),
        }
    }
}

/// One instance of the SCA scheme: joint or per-cluster greedy.
trait ScaInstance {
    fn build(&self, state: &Design) -> Result<ScaProgram>;
    /// Objective and per-cluster rates at a design.
    fn evaluate(&self, state: &Design) -> Result<(f64, Vec<f64>)>;
    fn max_violation(&self, state: &Design, rates: &[f64]) -> Result<f64>;
    /// Null-space beam subspaces `H_1^{<k}` for each design cluster.
    fn earlier(&self, k: usize) -> &[CVector];
    fn power_budget(&self) -> f64;
}

fn extract(inst: &dyn ScaInstance, sp: &ScaProgram, x: &[f64]) -> Result<Design> {
    let n = sp.layout.clusters.len();
    let mut beams = Vec::with_capacity(n);
    let mut powers = Vec::with_capacity(n);
    for k in 0..n {
        let mut w = proj_complement(inst.earlier(k), &sp.layout.beam(x, k))?;
        let norm = w.norm();
        if norm > 1.0 {
            w.unscale_mut(norm);
        }
        beams.push(w);
        let p = sp.layout.powers(x, k);
        powers.push(PowerSplit::new(p.strong.max(0.0), p.weak.max(0.0)));
    }
    let used: f64 = powers.iter().map(|p| p.total()).sum();
    let budget = inst.power_budget();
    if used > budget {
        let s = budget / used;
        for p in &mut powers {
            *p = PowerSplit::new(p.strong * s, p.weak * s);
        }
    }
    Ok(Design { beams, powers })
}

struct RunOutput {
    state: Design,
    rates: Vec<f64>,
    objective: f64,
    iterations: usize,
    history: Vec<f64>,
    trace: Vec<IterationRecord>,
}

fn run(inst: &dyn ScaInstance, init: Design, sca: &ScaConfig) -> Result<RunOutput> {
    sca.validate()?;
    let mut state = init;
    let (mut objective, mut rates) = inst.evaluate(&state)?;
    let mut history = vec![objective];
    let mut trace = vec![IterationRecord {
        iteration: 0,
        objective,
        max_violation: inst.max_violation(&state, &rates)?,
        step_norm: 0.0,
    }];
    let mut iterations = 0;
    for it in 1..=sca.max_iter {
        let sp = inst.build(&state)?;
        let mut res = solve(&sp.program, sca.subproblem_tol)?;
        if res.status == SolveStatus::NumericalFailure {
            log::debug!("iteration {it}: retrying subproblem at a looser tolerance");
            res = solve(&sp.program, sca.subproblem_tol * RETRY_FACTOR)?;
        }
        let usable = res.status == SolveStatus::NumericalFailure
            && res.primal_residual <= sca.subproblem_tol * RETRY_FACTOR
            && res.gap <= INEXACT_GAP;
        if usable {
            log::debug!("iteration {it}: using an inexact subproblem point (gap {:.2e})", res.gap);
        } else if res.status != SolveStatus::Optimal {
            return Err(Error::Subproblem { iteration: it, status: res.status });
        }
        iterations = it;
        let candidate = extract(inst, &sp, &res.x)?;
        let next = state.toward(&candidate, sca.step);
        let (next_obj, next_rates) = inst.evaluate(&next)?;
        let step_norm = state.distance(&next);
        if next_obj < objective {
            // Only round-off can make the re-expanded point worse; keep the incumbent.
            log::debug!("iteration {it}: objective {next_obj} below incumbent {objective}, stopping");
            break;
        }
        let improvement = next_obj - objective;
        state = next;
        objective = next_obj;
        rates = next_rates;
        history.push(objective);
        trace.push(IterationRecord {
            iteration: it,
            objective,
            max_violation: inst.max_violation(&state, &rates)?,
            step_norm,
        });
        log::trace!("iteration {it}: objective {objective:.9} (+{improvement:.3e})");
        if improvement < sca.tol {
            break;
        }
    }
    Ok(RunOutput { state, rates, objective, iterations, history, trace })
}

struct Joint<'a> {
    assignment: &'a ClusterAssignment,
    config: &'a SystemConfig,
    strong: Vec<CVector>,
}

impl Joint<'_> {
    fn solution(&self, state: &Design, rates: &[f64]) -> BeamPowerSolution {
        BeamPowerSolution {
            beams: state.beams.clone(),
            powers: state.powers.clone(),
            weak_rates: rates.to_vec(),
            objective: rates.iter().sum(),
            iterations: 0,
            history: Vec::new(),
            trace: Vec::new(),
        }
    }
}

impl ScaInstance for Joint<'_> {
    fn build(&self, state: &Design) -> Result<ScaProgram> {
        let point = ScaPoint::from_design(self.assignment, &state.beams, &state.powers)?;
        build_p1(&point, self.assignment, self.config)
    }

    fn evaluate(&self, state: &Design) -> Result<(f64, Vec<f64>)> {
        let mut rates = Vec::with_capacity(state.beams.len());
        for (k, cl) in self.assignment.clusters.iter().enumerate() {
            let i_bar = interference_upper_bound(k, self.assignment, &state.beams, &state.powers)?;
            let (r, _) =
                weak_rate_given(&cl.strong, &cl.weak, &state.beams[k], state.powers[k], i_bar, self.config.noise_var);
            rates.push(r);
        }
        Ok((rates.iter().sum(), rates))
    }

    fn max_violation(&self, state: &Design, rates: &[f64]) -> Result<f64> {
        Ok(verify_original_feasibility(&self.solution(state, rates), self.assignment, self.config)?.max())
    }

    fn earlier(&self, k: usize) -> &[CVector] {
        &self.strong[..k]
    }

    fn power_budget(&self) -> f64 {
        self.config.total_power
    }
}

fn check_start(
    k: usize,
    h_k1: &CVector,
    earlier: &[CVector],
    w: &CVector,
    p: PowerSplit,
    config: &SystemConfig,
) -> Result<()> {
    let floor = config.eta * config.cluster_power() * proj_complement(earlier, h_k1)?.norm_squared();
    let achieved = p.strong * inner(h_k1, w).norm_sqr();
    let violation = (floor - achieved) / floor.max(1.0);
    if violation > START_FEAS_TOL {
        return Err(Error::Infeasible { cluster: k, violation });
    }
    Ok(())
}

/// Joint beam and power design over all clusters, started from `init`.
pub fn solve_joint(
    assignment: &ClusterAssignment,
    config: &SystemConfig,
    sca: &ScaConfig,
    init: &ScaPoint,
) -> Result<BeamPowerSolution> {
    config.validate()?;
    let strong = assignment.strong_channels();
    let state = Design { beams: init.beams(), powers: init.powers() };
    if state.beams.len() != assignment.len() {
        return Err(Error::Dimension { expected: assignment.len(), got: state.beams.len() });
    }
    for k in 0..assignment.len() {
        check_start(k, &strong[k], &strong[..k], &state.beams[k], state.powers[k], config)?;
    }
    let used: f64 = state.powers.iter().map(|p| p.total()).sum();
    if used > config.total_power * (1.0 + START_FEAS_TOL) {
        return Err(Error::Precondition(format!("initial powers {used} exceed the budget")));
    }
    let inst = Joint { assignment, config, strong };
    let out = run(&inst, state, sca)?;
    let mut sol = inst.solution(&out.state, &out.rates);
    sol.iterations = out.iterations;
    sol.objective = out.objective;
    sol.history = out.history;
    sol.trace = out.trace;
    let report = verify_original_feasibility(&sol, assignment, config)?;
    if !report.passes(RESULT_FEAS_TOL) {
        return Err(Error::Precondition(format!(
            "joint design violates {:?} by {:.3e}",
            report.worst(),
            report.max()
        )));
    }
    Ok(sol)
}

struct Greedy<'p, 'a> {
    problem: &'p GreedyProblem<'a>,
}

impl Greedy<'_, '_> {
    fn view(&self) -> GreedyView<'_> {
        GreedyView {
            h_k1: self.problem.h_k1,
            h_k2: self.problem.h_k2,
            fixed: self.problem.fixed,
            estimates: self.problem.later_estimates,
            cluster_power: self.problem.config.cluster_power(),
        }
    }
}

impl ScaInstance for Greedy<'_, '_> {
    fn build(&self, state: &Design) -> Result<ScaProgram> {
        let single = ClusterAssignment::from_pairs(vec![(self.problem.h_k1.clone(), self.problem.h_k2.clone())]);
        let point = ScaPoint::from_design(&single, &state.beams, &state.powers)?;
        build_p2(self.problem, &point.clusters[0])
    }

    fn evaluate(&self, state: &Design) -> Result<(f64, Vec<f64>)> {
        let (w, p) = (&state.beams[0], state.powers[0]);
        let i = greedy_interference_bound(&self.view(), w, p.strong)?;
        let (r, _) = weak_rate_given(self.problem.h_k1, self.problem.h_k2, w, p, i, self.problem.config.noise_var);
        Ok((r, vec![r]))
    }

    fn max_violation(&self, state: &Design, _rates: &[f64]) -> Result<f64> {
        let cfg = self.problem.config;
        let (w, p) = (&state.beams[0], state.powers[0]);
        let floor =
            cfg.eta * cfg.cluster_power() * proj_complement(self.problem.earlier_strong, self.problem.h_k1)?.norm_squared();
        let snr = (floor - p.strong * inner(self.problem.h_k1, w).norm_sqr()) / floor.max(1.0);
        let null: f64 = self.problem.earlier_strong.iter().map(|h| inner(h, w).norm_sqr()).sum::<f64>().sqrt();
        let norm = w.norm() - 1.0;
        let power = (p.total() - cfg.cluster_power()) / cfg.cluster_power().max(1.0);
        Ok([snr, null, norm, power].into_iter().fold(0.0, f64::max))
    }

    fn earlier(&self, _k: usize) -> &[CVector] {
        self.problem.earlier_strong
    }

    fn power_budget(&self) -> f64 {
        self.problem.config.cluster_power()
    }
}

/// Per-cluster design by SCA on the greedy single-cluster problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyDesigner {
    pub sca: ScaConfig,
}

impl ClusterBeamDesigner for GreedyDesigner {
    fn design(&self, problem: &GreedyProblem<'_>) -> Result<GreedyDesign> {
        let cfg = problem.config;
        let powers = PowerSplit::eta_split(cfg.cluster_power(), cfg.eta);
        check_start(problem.k, problem.h_k1, problem.earlier_strong, problem.initial, powers, cfg)?;
        let init = Design { beams: vec![problem.initial.clone()], powers: vec![powers] };
        let out = run(&Greedy { problem }, init, &self.sca)?;
        Ok(GreedyDesign {
            beam: out.state.beams[0].clone(),
            powers: out.state.powers[0],
            weak_rate: out.objective,
            iterations: out.iterations,
        })
    }
}
