//! Closed-form rates and interference terms of THP-aided NOMA clusters.
//!
//! All rates are in bits/s/Hz. Cluster indices are zero-based and follow the
//! THP encoding order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{inner, proj_complement, CVector};
use crate::error::{Error, Result};
use crate::scheduling::ClusterAssignment;
use crate::thp::GAIN_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    /// Strong-user power `p_k1`.
    pub strong: f64,
    /// Weak-user power `p_k2`.
    pub weak: f64,
}

impl PowerSplit {
    pub fn new(strong: f64, weak: f64) -> Self {
        Self { strong, weak }
    }

    pub fn total(&self) -> f64 {
        self.strong + self.weak
    }

    /// `p_k1 = eta p`, `p_k2 = (1 - eta) p`.
    pub fn eta_split(cluster_power: f64, eta: f64) -> Self {
        Self::new(eta * cluster_power, (1.0 - eta) * cluster_power)
    }
}

/// Which side of the min limits the weak-user rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    /// Decodability of `d_k2` at the strong user.
    StrongSide,
    /// Decodability of `d_k2` at the weak user itself.
    WeakSide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRates {
    pub strong: f64,
    pub weak: f64,
    pub binding: Binding,
    pub interference: f64,
    pub interference_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    pub clusters: Vec<ClusterRates>,
}

impl RateReport {
    pub fn sum_strong(&self) -> f64 {
        self.clusters.iter().map(|c| c.strong).sum()
    }

    pub fn sum_weak(&self) -> f64 {
        self.clusters.iter().map(|c| c.weak).sum()
    }
}

/// `R_k1 = log2(1 + p_k1 |h_k1^H w_k|^2 / sigma^2)`.
pub fn strong_rate(h_k1: &CVector, w_k: &CVector, p_k1: f64, noise_var: f64) -> f64 {
    (1.0 + p_k1 * inner(h_k1, w_k).norm_sqr() / noise_var).log2()
}

fn effective_gain(cluster: usize, h_k1: &CVector, w_k: &CVector) -> Result<Complex64> {
    let g = inner(h_k1, w_k);
    if g.norm() < GAIN_FLOOR {
        return Err(Error::DegenerateGain { cluster, gain: g.norm() });
    }
    Ok(g)
}

/// Residual THP leakage `|h_k2^H w_j - (h_k2^H w_k / h_k1^H w_k) h_k1^H w_j|^2`
/// of an earlier cluster `j` at the weak user of cluster `k`.
fn residual_leakage(h_k1: &CVector, h_k2: &CVector, w_k: &CVector, w_j: &CVector, gain: Complex64) -> f64 {
    (inner(h_k2, w_j) - inner(h_k2, w_k) / gain * inner(h_k1, w_j)).norm_sqr()
}

/// Exact weak-user interference `I_k`.
pub fn exact_interference(
    k: usize,
    assignment: &ClusterAssignment,
    beams: &[CVector],
    powers: &[PowerSplit],
) -> Result<f64> {
    let cl = &assignment.clusters[k];
    let w_k = &beams[k];
    let mut total = powers[k].strong * inner(&cl.weak, w_k).norm_sqr();
    if k > 0 {
        let gain = effective_gain(k, &cl.strong, w_k)?;
        for j in 0..k {
            total += powers[j].total() * residual_leakage(&cl.strong, &cl.weak, w_k, &beams[j], gain);
        }
    }
    for j in k + 1..beams.len() {
        total += powers[j].total() * inner(&cl.weak, &beams[j]).norm_sqr();
    }
    Ok(total)
}

/// Cauchy-Schwarz upper bound `I-bar_k`: each earlier-cluster residual is
/// replaced by `(w_k^H Pi_k w_k)(w_j^H Pi_k w_j) p_j / |h_k1^H w_k|^2` with
/// `Pi_k = h_k1 h_k1^H + h_k2 h_k2^H`.
pub fn interference_upper_bound(
    k: usize,
    assignment: &ClusterAssignment,
    beams: &[CVector],
    powers: &[PowerSplit],
) -> Result<f64> {
    let cl = &assignment.clusters[k];
    let w_k = &beams[k];
    let mut total = powers[k].strong * inner(&cl.weak, w_k).norm_sqr();
    if k > 0 {
        let gain = effective_gain(k, &cl.strong, w_k)?;
        let quad_k = pi_quadratic(&cl.strong, &cl.weak, w_k);
        for j in 0..k {
            total += quad_k * pi_quadratic(&cl.strong, &cl.weak, &beams[j]) * powers[j].total() / gain.norm_sqr();
        }
    }
    for j in k + 1..beams.len() {
        total += powers[j].total() * inner(&cl.weak, &beams[j]).norm_sqr();
    }
    Ok(total)
}

/// `w^H (h_1 h_1^H + h_2 h_2^H) w`.
pub fn pi_quadratic(h1: &CVector, h2: &CVector, w: &CVector) -> f64 {
    inner(h1, w).norm_sqr() + inner(h2, w).norm_sqr()
}

/// The two SINRs inside the weak-user rate for a given interference level.
pub fn weak_sinrs(h_k1: &CVector, h_k2: &CVector, w_k: &CVector, p: PowerSplit, interference: f64, noise_var: f64) -> (f64, f64) {
    let g1 = inner(h_k1, w_k).norm_sqr();
    let g2 = inner(h_k2, w_k).norm_sqr();
    (p.weak * g1 / (p.strong * g1 + noise_var), p.weak * g2 / (interference + noise_var))
}

/// `R_k2` for an explicit interference value.
pub fn weak_rate_given(
    h_k1: &CVector,
    h_k2: &CVector,
    w_k: &CVector,
    p: PowerSplit,
    interference: f64,
    noise_var: f64,
) -> (f64, Binding) {
    let (strong_side, weak_side) = weak_sinrs(h_k1, h_k2, w_k, p, interference, noise_var);
    if strong_side <= weak_side {
        ((1.0 + strong_side).log2(), Binding::StrongSide)
    } else {
        ((1.0 + weak_side).log2(), Binding::WeakSide)
    }
}

/// `R_k2` with the exact interference `I_k`.
pub fn weak_rate(
    k: usize,
    assignment: &ClusterAssignment,
    beams: &[CVector],
    powers: &[PowerSplit],
    noise_var: f64,
) -> Result<(f64, Binding)> {
    let cl = &assignment.clusters[k];
    let i_k = exact_interference(k, assignment, beams, powers)?;
    Ok(weak_rate_given(&cl.strong, &cl.weak, &beams[k], powers[k], i_k, noise_var))
}

/// Inputs of the greedy interference estimate `I'_k`, where every other
/// cluster is assumed to carry `P / N_c`.
#[derive(Debug, Clone, Copy)]
pub struct GreedyView<'a> {
    pub h_k1: &'a CVector,
    pub h_k2: &'a CVector,
    /// Already designed beams of clusters `j < k`.
    pub fixed: &'a [CVector],
    /// Matched-filter estimates of clusters `j > k`.
    pub estimates: &'a [CVector],
    pub cluster_power: f64,
}

/// `I'_k` for a candidate beam and strong-user power.
pub fn greedy_interference(view: &GreedyView<'_>, w_k: &CVector, p_k1: f64) -> Result<f64> {
    let k = view.fixed.len();
    let mut total = p_k1 * inner(view.h_k2, w_k).norm_sqr();
    if k > 0 {
        let gain = effective_gain(k, view.h_k1, w_k)?;
        for w_j in view.fixed {
            total += view.cluster_power * residual_leakage(view.h_k1, view.h_k2, w_k, w_j, gain);
        }
    }
    for w_j in view.estimates {
        total += view.cluster_power * inner(view.h_k2, w_j).norm_sqr();
    }
    Ok(total)
}

/// Cauchy-Schwarz counterpart of [`greedy_interference`].
pub fn greedy_interference_bound(view: &GreedyView<'_>, w_k: &CVector, p_k1: f64) -> Result<f64> {
    let k = view.fixed.len();
    let mut total = p_k1 * inner(view.h_k2, w_k).norm_sqr();
    if k > 0 {
        let gain = effective_gain(k, view.h_k1, w_k)?;
        let quad_k = pi_quadratic(view.h_k1, view.h_k2, w_k);
        for w_j in view.fixed {
            total += view.cluster_power * quad_k * pi_quadratic(view.h_k1, view.h_k2, w_j) / gain.norm_sqr();
        }
    }
    for w_j in view.estimates {
        total += view.cluster_power * inner(view.h_k2, w_j).norm_sqr();
    }
    Ok(total)
}

/// Nominal maximum strong-user SNR `(P/N_c) |Pi^perp_{H_1^{<k}} h_k1|^2 / sigma^2`.
pub fn nominal_strong_snr(h_k1: &CVector, earlier: &[CVector], total_power: f64, n_clusters: usize, noise_var: f64) -> Result<f64> {
    let proj = proj_complement(earlier, h_k1)?;
    Ok(total_power / n_clusters as f64 * proj.norm_squared() / noise_var)
}

/// Per-cluster rates with exact interference, optionally with the
/// Cauchy-Schwarz bound attached.
pub fn rate_report(
    assignment: &ClusterAssignment,
    beams: &[CVector],
    powers: &[PowerSplit],
    noise_var: f64,
    with_bound: bool,
) -> Result<RateReport> {
    let mut clusters = Vec::with_capacity(beams.len());
    for (k, cl) in assignment.clusters.iter().enumerate() {
        let interference = exact_interference(k, assignment, beams, powers)?;
        let (weak, binding) = weak_rate_given(&cl.strong, &cl.weak, &beams[k], powers[k], interference, noise_var);
        let interference_bound = if with_bound {
            Some(interference_upper_bound(k, assignment, beams, powers)?)
        } else {
            None
        };
        clusters.push(ClusterRates {
            strong: strong_rate(&cl.strong, &beams[k], powers[k].strong, noise_var),
            weak,
            binding,
            interference,
            interference_bound,
        });
    }
    Ok(RateReport { clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::Cluster;
    use nalgebra::DVector;

    fn cv(xs: &[f64]) -> CVector {
        DVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn assignment(pairs: Vec<(CVector, CVector)>) -> ClusterAssignment {
        ClusterAssignment {
            clusters: pairs
                .into_iter()
                .enumerate()
                .map(|(i, (strong, weak))| Cluster { strong, weak, strong_id: i, weak_id: i })
                .collect(),
        }
    }

    #[test]
    fn strong_rate_examples() {
        let h = cv(&[1.0, 0.0]);
        let w = cv(&[1.0, 0.0]);
        assert!((strong_rate(&h, &w, 3.0, 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(strong_rate(&h, &w, 0.0, 1.0), 0.0);
    }

    #[test]
    fn weak_rate_direct_arithmetic() {
        let h1 = cv(&[1.0, 0.0]);
        let h2 = cv(&[0.1f64.sqrt(), 0.0]);
        let w = cv(&[1.0, 0.0]);
        let (r, b) = weak_rate_given(&h1, &h2, &w, PowerSplit::new(1.0, 3.0), 0.0, 1.0);
        assert!((r - 1.3f64.log2()).abs() < 1e-12);
        assert!((r - 0.3785).abs() < 1e-4);
        assert_eq!(b, Binding::WeakSide);
        let (r, _) = weak_rate_given(&h1, &h2, &w, PowerSplit::new(1.0, 0.0), 0.0, 1.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn symmetric_channels_have_equal_branches() {
        let h = cv(&[0.6, -0.3, 1.1]);
        let w = h.unscale(h.norm());
        let a = assignment(vec![(h.clone(), h.clone())]);
        let p = [PowerSplit::new(0.7, 2.1)];
        let i1 = exact_interference(0, &a, &[w.clone()], &p).unwrap();
        assert!((i1 - 0.7 * h.norm_squared()).abs() < 1e-12);
        let (s, wk) = weak_sinrs(&h, &h, &w, p[0], i1, 1.0);
        assert!((s - wk).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_interference_is_intra_term() {
        let h1 = cv(&[1.0, 2.0]);
        let h2 = cv(&[0.5, -0.5]);
        let w = cv(&[0.6, 0.8]);
        let a = assignment(vec![(h1, h2.clone())]);
        let p = [PowerSplit::new(1.5, 2.0)];
        let want = 1.5 * inner(&h2, &w).norm_sqr();
        assert!((exact_interference(0, &a, &[w.clone()], &p).unwrap() - want).abs() < 1e-15);
        assert!((interference_upper_bound(0, &a, &[w], &p).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn constructed_residual_term_and_tight_bound() {
        // Cluster 0 beam e2, cluster 1 (k) with h_k1 = e1, h_k2 = e2, w_k = e1.
        let e1 = cv(&[1.0, 0.0]);
        let e2 = cv(&[0.0, 1.0]);
        let a = assignment(vec![(e1.clone(), e1.clone()), (e1.clone(), e2.clone())]);
        let beams = vec![e2.clone(), e1.clone()];
        let p = vec![PowerSplit::new(0.0, 1.0), PowerSplit::new(0.0, 1.0)];
        // Residual: |h_k2^H w_j - (h_k2^H w_k / h_k1^H w_k) h_k1^H w_j|^2 p_j = |1 - 0|^2 = 1.
        assert!((exact_interference(1, &a, &beams, &p).unwrap() - 1.0).abs() < 1e-15);
        // Bound: (w_k^H Pi w_k)(w_j^H Pi w_j) p_j / |h_k1^H w_k|^2 = 1 * 1 * 1 / 1.
        assert!((interference_upper_bound(1, &a, &beams, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_orthogonal_to_all_beams() {
        let a = assignment(vec![
            (cv(&[1.0, 0.0, 0.0]), cv(&[0.0, 0.0, 1.0])),
            (cv(&[0.3, 1.0, 0.0]), cv(&[0.0, 0.0, 0.2])),
        ]);
        let beams = vec![cv(&[1.0, 0.0, 0.0]), cv(&[0.0, 1.0, 0.0])];
        let p = vec![PowerSplit::new(1.0, 1.0); 2];
        for k in 0..2 {
            assert!(exact_interference(k, &a, &beams, &p).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn nominal_snr_examples() {
        let s = 0.5f64.sqrt();
        let h11 = cv(&[1.0, 0.0]);
        let h21 = cv(&[s, s]);
        assert!((nominal_strong_snr(&h21, &[h11.clone()], 4.0, 2, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((nominal_strong_snr(&h11, &[], 4.0, 2, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let inside = cv(&[2.0, 0.0]);
        assert!(nominal_strong_snr(&inside, &[h11], 4.0, 2, 1.0).unwrap().abs() < 1e-20);
    }
}
