//! Successive convex approximation for the joint beam and power design and
//! for the per-cluster greedy design used during scheduling.

mod nova;
mod program;
mod taylor;
mod verify;

use serde::{Deserialize, Serialize};

use crate::channel::{inner, CVector, SystemConfig};
use crate::error::{Error, Result};
use crate::rates::{pi_quadratic, PowerSplit};
use crate::scheduling::{matched_filter_estimates, ClusterAssignment};

pub use nova::{solve_joint, write_trace, GreedyDesigner, IterationRecord};
pub use program::{build_p1, build_p2, ClusterVars, ScaProgram, VarLayout};
pub use taylor::{taylor_exp, taylor_quad};
pub use verify::{verify_original_feasibility, ConstraintFamily, FeasibilityReport};

/// Log arguments at or below this value are treated as a degenerate point.
pub const SLACK_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaConfig {
    /// Step size `gamma` in `(0, 1]`.
    pub step: f64,
    /// Stop once the objective improves by less than this many bits.
    pub tol: f64,
    pub max_iter: usize,
    pub subproblem_tol: f64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self { step: 1.0, tol: 1e-4, max_iter: 100, subproblem_tol: 1e-8 }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::Config(format!("step size must lie in (0, 1], got {}", self.step)));
        }
        if !(self.tol > 0.0) || !(self.subproblem_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Expansion point of the convex approximation for one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPoint {
    pub beam: CVector,
    pub powers: PowerSplit,
    /// `m_k1, m_k2, m_k3`.
    pub m: [f64; 3],
    /// `l_k1, l_k2, l_k3, l_k4`.
    pub l: [f64; 4],
    /// `n_kj` indexed by `j`; the entry `j = k` is unused and zero.
    pub n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaPoint {
    pub clusters: Vec<ClusterPoint>,
}

impl ScaPoint {
    pub fn beams(&self) -> Vec<CVector> {
        self.clusters.iter().map(|c| c.beam.clone()).collect()
    }

    pub fn powers(&self) -> Vec<PowerSplit> {
        self.clusters.iter().map(|c| c.powers).collect()
    }

    /// Slacks placed exactly at the logarithms of the quantities they bound.
    pub fn from_design(assignment: &ClusterAssignment, beams: &[CVector], powers: &[PowerSplit]) -> Result<Self> {
        let n_c = assignment.len();
        if beams.len() != n_c || powers.len() != n_c {
            return Err(Error::Dimension { expected: n_c, got: beams.len().min(powers.len()) });
        }
        let mut clusters = Vec::with_capacity(n_c);
        for (k, cl) in assignment.clusters.iter().enumerate() {
            let w = &beams[k];
            let p = powers[k];
            let m = [
                safe_log(inner(&cl.strong, w).norm_sqr(), || format!("m_{k}1"))?,
                safe_log(inner(&cl.weak, w).norm_sqr(), || format!("m_{k}2"))?,
                safe_log(pi_quadratic(&cl.strong, &cl.weak, w), || format!("m_{k}3"))?,
            ];
            let lp1 = safe_log(p.strong, || format!("l_{k}1"))?;
            let l = [
                lp1,
                lp1,
                safe_log(p.weak, || format!("l_{k}3"))?,
                safe_log(p.total(), || format!("l_{k}4"))?,
            ];
            let mut n = vec![0.0; n_c];
            for (j, w_j) in beams.iter().enumerate() {
                if j < k {
                    n[j] = safe_log(pi_quadratic(&cl.strong, &cl.weak, w_j), || format!("n_{k}{j}"))?;
                } else if j > k {
                    n[j] = safe_log(inner(&cl.weak, w_j).norm_sqr(), || format!("n_{k}{j}"))?;
                }
            }
            clusters.push(ClusterPoint { beam: w.clone(), powers: p, m, l, n });
        }
        Ok(Self { clusters })
    }
}

pub(crate) fn safe_log(v: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if !(v > SLACK_FLOOR) || !v.is_finite() {
        return Err(Error::DegenerateSlack { what: what(), value: v });
    }
    Ok(v.ln())
}

/// Matched-filter beams with the nominal `eta` split as the expansion point.
pub fn init_alpha(assignment: &ClusterAssignment, config: &SystemConfig) -> Result<ScaPoint> {
    let beams = matched_filter_estimates(&assignment.strong_channels())?;
    let powers = vec![PowerSplit::eta_split(config.cluster_power(), config.eta); assignment.len()];
    ScaPoint::from_design(assignment, &beams, &powers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPowerSolution {
    pub beams: Vec<CVector>,
    pub powers: Vec<PowerSplit>,
    /// Weak-user rates under the optimized (bounded-interference) model.
    pub weak_rates: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after each iteration, starting with the initial point.
    pub history: Vec<f64>,
    pub trace: Vec<IterationRecord>,
}
