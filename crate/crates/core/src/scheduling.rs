//! Strong-user selection by semi-orthogonal user selection (SUS) and greedy
//! weak-user pairing with sequential per-cluster beam design.

use serde::Serialize;

use crate::channel::{proj_complement, CVector, SystemConfig, UserPopulation};
use crate::error::{Error, Result};
use crate::rates::{greedy_interference, weak_rate_given, GreedyView, PowerSplit};
use crate::sca::BeamPowerSolution;

/// Relative tolerance under which two selection scores are treated as equal,
/// so that the lowest index wins.
const SCORE_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub strong: CVector,
    pub weak: CVector,
    pub strong_id: usize,
    pub weak_id: usize,
}

/// Clusters in THP encoding order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterAssignment {
    pub clusters: Vec<Cluster>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn strong_channels(&self) -> Vec<CVector> {
        self.clusters.iter().map(|c| c.strong.clone()).collect()
    }

    pub fn weak_channels(&self) -> Vec<CVector> {
        self.clusters.iter().map(|c| c.weak.clone()).collect()
    }

    /// Builds an assignment from explicit channel pairs, ids in list order.
    pub fn from_pairs(pairs: Vec<(CVector, CVector)>) -> Self {
        Self {
            clusters: pairs
                .into_iter()
                .enumerate()
                .map(|(i, (strong, weak))| Cluster { strong, weak, strong_id: i, weak_id: i })
                .collect(),
        }
    }

    pub fn n_tx(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.strong.len())
    }

    /// No user repeated within either set.
    pub fn ids_distinct(&self) -> bool {
        let mut s: Vec<usize> = self.clusters.iter().map(|c| c.strong_id).collect();
        let mut w: Vec<usize> = self.clusters.iter().map(|c| c.weak_id).collect();
        s.sort_unstable();
        w.sort_unstable();
        s.windows(2).all(|p| p[0] != p[1]) && w.windows(2).all(|p| p[0] != p[1])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterTrace {
    /// `(weak user id, estimated rate)` for every candidate still in the pool.
    pub candidates: Vec<(usize, f64)>,
    pub selected: usize,
    /// Matched-filter estimates `w-hat_j` for `j >= k` used in the estimate.
    pub estimates: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SchedulerTrace {
    pub strong_order: Vec<usize>,
    pub clusters: Vec<ClusterTrace>,
}

fn argmax_lowest(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let scores: Vec<f64> = scores.collect();
    let scale = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) if s > scores[b] + SCORE_TIE_TOL * scale.max(f64::MIN_POSITIVE) => best = Some(i),
            _ => {}
        }
    }
    best
}

/// Greedy SUS without an orthogonality threshold.
pub fn sus_select(strong_set: &[CVector], n_c: usize) -> Result<Vec<usize>> {
    sus_select_with_threshold(strong_set, n_c, None)
}

/// Greedy SUS. With `Some(t)`, candidates whose projected-to-total norm ratio
/// falls below `t` are pruned after each pick.
pub fn sus_select_with_threshold(strong_set: &[CVector], n_c: usize, threshold: Option<f64>) -> Result<Vec<usize>> {
    if strong_set.len() < n_c {
        return Err(Error::TooFewUsers { needed: n_c, have: strong_set.len() });
    }
    let mut selected: Vec<usize> = Vec::with_capacity(n_c);
    let mut chosen: Vec<CVector> = Vec::with_capacity(n_c);
    let mut pool: Vec<usize> = (0..strong_set.len()).collect();
    while selected.len() < n_c {
        let norms = pool
            .iter()
            .map(|&i| proj_complement(&chosen, &strong_set[i]).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let pick = argmax_lowest(norms.iter().copied())
            .ok_or(Error::TooFewUsers { needed: n_c, have: selected.len() })?;
        let id = pool.remove(pick);
        selected.push(id);
        chosen.push(strong_set[id].clone());
        if let Some(t) = threshold {
            let mut kept = Vec::with_capacity(pool.len());
            for &i in &pool {
                let h = &strong_set[i];
                if proj_complement(&chosen, h)?.norm() >= t * h.norm() {
                    kept.push(i);
                }
            }
            pool = kept;
        }
    }
    Ok(selected)
}

/// `w-hat_k = Pi^perp_{H_1^{<k}} h_k1 / ||.||`.
pub fn matched_filter_estimates(strong_channels: &[CVector]) -> Result<Vec<CVector>> {
    let mut out = Vec::with_capacity(strong_channels.len());
    for (k, h) in strong_channels.iter().enumerate() {
        let v = proj_complement(&strong_channels[..k], h)?;
        let n = v.norm();
        if n <= crate::channel::RANK_TOL * h.norm().max(f64::MIN_POSITIVE) || n == 0.0 {
            return Err(Error::RankDeficient { rank: k, needed: k + 1 });
        }
        out.push(v.unscale(n));
    }
    Ok(out)
}

/// Estimated interference `I-hat_u` for weak candidate `g_u` in cluster `k`.
///
/// `estimates` holds `w-hat_j` for every cluster; entries `j < k` are ignored
/// in favour of `fixed`.
pub fn estimate_ici(
    g_u: &CVector,
    h_k1: &CVector,
    fixed: &[CVector],
    estimates: &[CVector],
    cluster_power: f64,
    eta: f64,
) -> Result<f64> {
    let k = fixed.len();
    let view = GreedyView { h_k1, h_k2: g_u, fixed, estimates: &estimates[k + 1..], cluster_power };
    greedy_interference(&view, &estimates[k], eta * cluster_power)
}

/// Per-cluster beam design in the sequential greedy stage.
#[derive(Debug, Clone)]
pub struct GreedyProblem<'a> {
    pub k: usize,
    pub h_k1: &'a CVector,
    pub h_k2: &'a CVector,
    /// Strong channels of clusters `j < k`.
    pub earlier_strong: &'a [CVector],
    /// Designed beams of clusters `j < k`.
    pub fixed: &'a [CVector],
    /// Matched-filter estimates of clusters `j > k`.
    pub later_estimates: &'a [CVector],
    /// Matched-filter estimate of cluster `k`, the starting beam.
    pub initial: &'a CVector,
    pub config: &'a SystemConfig,
}

#[derive(Debug, Clone)]
pub struct GreedyDesign {
    pub beam: CVector,
    pub powers: PowerSplit,
    /// Optimized weak-rate objective (bits/s/Hz).
    pub weak_rate: f64,
    pub iterations: usize,
}

pub trait ClusterBeamDesigner {
    fn design(&self, problem: &GreedyProblem<'_>) -> Result<GreedyDesign>;
}

/// Keeps the matched-filter estimate and the nominal `eta` split.
#[derive(Debug, Clone, Copy, Default)]
pub struct MatchedFilterDesigner;

impl ClusterBeamDesigner for MatchedFilterDesigner {
    fn design(&self, p: &GreedyProblem<'_>) -> Result<GreedyDesign> {
        let cp = p.config.cluster_power();
        let powers = PowerSplit::eta_split(cp, p.config.eta);
        let view = GreedyView {
            h_k1: p.h_k1,
            h_k2: p.h_k2,
            fixed: p.fixed,
            estimates: p.later_estimates,
            cluster_power: cp,
        };
        let i = greedy_interference(&view, p.initial, powers.strong)?;
        let (weak_rate, _) = weak_rate_given(p.h_k1, p.h_k2, p.initial, powers, i, p.config.noise_var);
        Ok(GreedyDesign { beam: p.initial.clone(), powers, weak_rate, iterations: 0 })
    }
}

pub struct ScheduleOutcome {
    pub assignment: ClusterAssignment,
    pub solution: BeamPowerSolution,
    pub trace: SchedulerTrace,
}

fn to_pairs(v: &CVector) -> Vec<(f64, f64)> {
    v.iter().map(|z| (z.re, z.im)).collect()
}

/// SUS for the strong users, then greedy weak-user selection and sequential
/// per-cluster design.
pub fn schedule(
    population: &UserPopulation,
    config: &SystemConfig,
    designer: &dyn ClusterBeamDesigner,
) -> Result<ScheduleOutcome> {
    config.validate()?;
    let n_c = config.n_clusters;
    if population.weak_set.len() < n_c {
        return Err(Error::TooFewUsers { needed: n_c, have: population.weak_set.len() });
    }
    let order = sus_select(&population.strong_set, n_c)?;
    let strong: Vec<CVector> = order.iter().map(|&i| population.strong_set[i].clone()).collect();
    let estimates = matched_filter_estimates(&strong)?;
    let cp = config.cluster_power();
    let est_powers = PowerSplit::eta_split(cp, config.eta);

    let mut pool: Vec<usize> = (0..population.weak_set.len()).collect();
    let mut beams: Vec<CVector> = Vec::with_capacity(n_c);
    let mut powers = Vec::with_capacity(n_c);
    let mut weak_rates = Vec::with_capacity(n_c);
    let mut iterations = 0;
    let mut clusters = Vec::with_capacity(n_c);
    let mut trace = SchedulerTrace { strong_order: order.clone(), clusters: Vec::with_capacity(n_c) };

    for k in 0..n_c {
        let h_k1 = &strong[k];
        let rates = pool
            .iter()
            .map(|&u| {
                let g = &population.weak_set[u];
                let i_hat = estimate_ici(g, h_k1, &beams, &estimates, cp, config.eta)?;
                Ok(weak_rate_given(h_k1, g, &estimates[k], est_powers, i_hat, config.noise_var).0)
            })
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| Error::Cluster { cluster: k, source: Box::new(e) })?;
        let pick = argmax_lowest(rates.iter().copied()).expect("pool is non-empty");
        let u_star = pool[pick];
        trace.clusters.push(ClusterTrace {
            candidates: pool.iter().copied().zip(rates.iter().copied()).collect(),
            selected: u_star,
            estimates: estimates[k..].iter().map(to_pairs).collect(),
        });
        pool.remove(pick);

        let h_k2 = &population.weak_set[u_star];
        let problem = GreedyProblem {
            k,
            h_k1,
            h_k2,
            earlier_strong: &strong[..k],
            fixed: &beams,
            later_estimates: &estimates[k + 1..],
            initial: &estimates[k],
            config,
        };
        let design = designer
            .design(&problem)
            .map_err(|e| Error::Cluster { cluster: k, source: Box::new(e) })?;
        iterations += design.iterations;
        beams.push(design.beam);
        powers.push(design.powers);
        weak_rates.push(design.weak_rate);
        clusters.push(Cluster { strong: h_k1.clone(), weak: h_k2.clone(), strong_id: order[k], weak_id: u_star });
    }

    let objective = weak_rates.iter().sum();
    Ok(ScheduleOutcome {
        assignment: ClusterAssignment { clusters },
        solution: BeamPowerSolution { beams, powers, weak_rates, objective, iterations, history: Vec::new(), trace: Vec::new() },
        trace,
    })
}
