//! Zero-forcing inter-cluster beamforming with NOMA superposition inside
//! each cluster.

use crate::channel::{inner, proj_complement, rank, CVector, SystemConfig};
use crate::error::{Error, Result};
use crate::rates::{interference_upper_bound, rate_report, weak_rate_given, PowerSplit, RateReport};
use crate::sca::BeamPowerSolution;
use crate::scheduling::ClusterAssignment;

#[derive(Debug, Clone)]
pub struct ZfSolution {
    pub beams: Vec<CVector>,
    pub powers: Vec<PowerSplit>,
    pub rates: RateReport,
}

impl ZfSolution {
    /// The same design in the form used by the THP feasibility check, with
    /// weak rates evaluated under the bounded interference model.
    pub fn as_solution(&self, assignment: &ClusterAssignment, config: &SystemConfig) -> Result<BeamPowerSolution> {
        let mut weak_rates = Vec::with_capacity(self.beams.len());
        for (k, cl) in assignment.clusters.iter().enumerate() {
            let i_bar = interference_upper_bound(k, assignment, &self.beams, &self.powers)?;
            weak_rates.push(
                weak_rate_given(&cl.strong, &cl.weak, &self.beams[k], self.powers[k], i_bar, config.noise_var).0,
            );
        }
        Ok(BeamPowerSolution {
            beams: self.beams.clone(),
            powers: self.powers.clone(),
            objective: weak_rates.iter().sum(),
            weak_rates,
            iterations: 0,
            history: Vec::new(),
            trace: Vec::new(),
        })
    }
}

/// Unit-norm `w_k` in `C^perp(H_1^{-k})`, matched to `h_k1` inside that space.
pub fn zf_beams(strong_channels: &[CVector]) -> Result<Vec<CVector>> {
    let n_c = strong_channels.len();
    let Some(n_tx) = strong_channels.first().map(|h| h.len()) else {
        return Ok(Vec::new());
    };
    if n_c > n_tx {
        return Err(Error::Dimension { expected: n_tx, got: n_c });
    }
    let r = rank(strong_channels);
    if r < n_c {
        return Err(Error::RankDeficient { rank: r, needed: n_c });
    }
    let mut beams = Vec::with_capacity(n_c);
    for k in 0..n_c {
        let others: Vec<CVector> =
            strong_channels.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, h)| h.clone()).collect();
        let w = proj_complement(&others, &strong_channels[k])?;
        let n = w.norm();
        if n <= crate::channel::RANK_TOL * strong_channels[k].norm() {
            return Err(Error::RankDeficient { rank: r, needed: n_c });
        }
        beams.push(w.unscale(n));
    }
    Ok(beams)
}

/// ZF beams with equal cluster power `P / N_c` split by `eta`.
pub fn zf_noma_rates(assignment: &ClusterAssignment, config: &SystemConfig) -> Result<ZfSolution> {
    let beams = zf_beams(&assignment.strong_channels())?;
    let powers = vec![PowerSplit::eta_split(config.cluster_power(), config.eta); assignment.len()];
    let rates = rate_report(assignment, &beams, &powers, config.noise_var, false)?;
    Ok(ZfSolution { beams, powers, rates })
}

/// Largest `|h_j1^H w_k|` over `j != k`.
pub fn max_strong_leakage(assignment: &ClusterAssignment, beams: &[CVector]) -> f64 {
    let mut m: f64 = 0.0;
    for (j, cl) in assignment.clusters.iter().enumerate() {
        for (k, w) in beams.iter().enumerate() {
            if j != k {
                m = m.max(inner(&cl.strong, w).norm());
            }
        }
    }
    m
}
