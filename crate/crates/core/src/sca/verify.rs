//! Direct evaluation of the original (non-convexified) constraints.

use serde::Serialize;

use super::BeamPowerSolution;
use crate::channel::{inner, proj_complement, SystemConfig};
use crate::error::{Error, Result};
use crate::rates::interference_upper_bound;
use crate::scheduling::ClusterAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintFamily {
    StrongSnr,
    StrongSideRate,
    WeakSideRate,
    NullSpace,
    BeamNorm,
    TotalPower,
}

/// Largest violation per constraint family; zero means satisfied.
///
/// The strong-SNR floor is measured relative to `max(c_k, 1)`, rate
/// branches in bits, the null space as `||(H_1^{<k})^H w_k||`, beam norms
/// as `||w_k|| - 1` and the power budget relative to `max(P, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FeasibilityReport {
    pub strong_snr: f64,
    pub strong_side_rate: f64,
    pub weak_side_rate: f64,
    pub null_space: f64,
    pub beam_norm: f64,
    pub total_power: f64,
}

impl FeasibilityReport {
    pub fn families(&self) -> [(ConstraintFamily, f64); 6] {
        [
            (ConstraintFamily::StrongSnr, self.strong_snr),
            (ConstraintFamily::StrongSideRate, self.strong_side_rate),
            (ConstraintFamily::WeakSideRate, self.weak_side_rate),
            (ConstraintFamily::NullSpace, self.null_space),
            (ConstraintFamily::BeamNorm, self.beam_norm),
            (ConstraintFamily::TotalPower, self.total_power),
        ]
    }

    pub fn max(&self) -> f64 {
        self.families().iter().fold(0.0, |m, f| m.max(f.1))
    }

    /// The family with the largest positive violation.
    pub fn worst(&self) -> Option<ConstraintFamily> {
        self.families()
            .into_iter()
            .filter(|f| f.1 > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|f| f.0)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn verify_original_feasibility(
    solution: &BeamPowerSolution,
    assignment: &ClusterAssignment,
    config: &SystemConfig,
) -> Result<FeasibilityReport> {
    let n_c = assignment.len();
    if solution.beams.len() != n_c || solution.powers.len() != n_c || solution.weak_rates.len() != n_c {
        return Err(Error::Dimension { expected: n_c, got: solution.beams.len() });
    }
    let strong = assignment.strong_channels();
    let sigma2 = config.noise_var;
    let mut rep = FeasibilityReport::default();
    for (k, cl) in assignment.clusters.iter().enumerate() {
        let w = &solution.beams[k];
        let p = solution.powers[k];
        let r = solution.weak_rates[k];
        let g1 = inner(&cl.strong, w).norm_sqr();
        let g2 = inner(&cl.weak, w).norm_sqr();

        let floor = config.eta * config.cluster_power() * proj_complement(&strong[..k], &cl.strong)?.norm_squared();
        rep.strong_snr = rep.strong_snr.max((floor - p.strong * g1) / floor.max(1.0));

        let strong_side = (1.0 + p.weak * g1 / (p.strong * g1 + sigma2)).log2();
        rep.strong_side_rate = rep.strong_side_rate.max(r - strong_side);

        let i_bar = interference_upper_bound(k, assignment, &solution.beams, &solution.powers)?;
        let weak_side = (1.0 + p.weak * g2 / (i_bar + sigma2)).log2();
        rep.weak_side_rate = rep.weak_side_rate.max(r - weak_side);

        let leak: f64 = strong[..k].iter().map(|h| inner(h, w).norm_sqr()).sum();
        rep.null_space = rep.null_space.max(leak.sqrt());
        rep.beam_norm = rep.beam_norm.max(w.norm() - 1.0);
    }
    let used: f64 = solution.powers.iter().map(|p| p.total()).sum();
    rep.total_power = (used - config.total_power) / config.total_power.max(1.0);
    for f in [
        &mut rep.strong_snr,
        &mut rep.strong_side_rate,
        &mut rep.weak_side_rate,
        &mut rep.null_space,
        &mut rep.beam_norm,
        &mut rep.total_power,
    ] {
        *f = f.max(0.0);
    }
    Ok(rep)
}
