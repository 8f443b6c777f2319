//! Channel populations and the complex linear algebra shared by every other
//! module: orthogonal projections, orthonormal complements and the QR form
//! used by textbook THP.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex column vector. `Complex64` is `repr(C)`, so the storage is
/// interleaved re/im pairs of `f64`.
pub type CVector = DVector<Complex64>;

/// An `N_t x 1` downlink channel from the base station to one user.
pub type ChannelVector = CVector;

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// Transmit antennas `N_t`.
    pub n_tx: usize,
    /// Spatial clusters `N_c`, one strong and one weak user each.
    pub n_clusters: usize,
    /// Total transmit power `P` (linear).
    pub total_power: f64,
    /// AWGN variance (linear).
    pub noise_var: f64,
    /// Fraction of the nominal strong-user SNR that must be guaranteed.
    pub eta: f64,
    /// Per-entry variance of strong-set channels.
    pub strong_var: f64,
    /// Per-entry variance of weak-set channels.
    pub weak_var: f64,
    /// Size of each of the two user sets.
    pub pop_per_set: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_tx: 4,
            n_clusters: 4,
            total_power: 10f64.powf(1.5),
            noise_var: 1.0,
            eta: 0.3,
            strong_var: 1.0,
            weak_var: 0.01,
            pop_per_set: 20,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_tx == 0 {
            return bad("n_tx must be at least 1");
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_tx {
            return bad("n_clusters must satisfy 1 <= n_clusters <= n_tx");
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return bad("total_power must be positive");
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return bad("noise_var must be positive");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta must lie in (0, 1]");
        }
        if !(self.weak_var > 0.0 && self.strong_var > self.weak_var && self.strong_var.is_finite()) {
            return bad("channel variances must satisfy strong_var > weak_var > 0");
        }
        if self.pop_per_set < self.n_clusters {
            return bad("pop_per_set must be at least n_clusters");
        }
        Ok(())
    }

    /// Equal per-cluster power `P / N_c`.
    pub fn cluster_power(&self) -> f64 {
        self.total_power / self.n_clusters as f64
    }

    /// `P` for a given SNR in dB, `P = sigma^2 10^(snr/10)`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.total_power = self.noise_var * 10f64.powf(snr_db / 10.0);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserPopulation {
    pub strong_set: Vec<ChannelVector>,
    pub weak_set: Vec<ChannelVector>,
    pub seed: u64,
}

/// Draws both user sets with i.i.d. `CN(0, var)` entries. The strong set is
/// drawn first from the same stream, so a seed fixes the whole population.
pub fn generate_population(config: &SystemConfig, seed: u64) -> Result<UserPopulation> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw_set = |var: f64| -> Vec<ChannelVector> {
        let scale = (var / 2.0).sqrt();
        (0..config.pop_per_set)
            .map(|_| {
                CVector::from_fn(config.n_tx, |_, _| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(scale * re, scale * im)
                })
            })
            .collect()
    };
    let strong_set = draw_set(config.strong_var);
    let weak_set = draw_set(config.weak_var);
    Ok(UserPopulation { strong_set, weak_set, seed })
}

fn check_dims(vectors: &[CVector], n: usize) -> Result<()> {
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
    }
    Ok(())
}

/// Full left singular basis of the `n x m` matrix whose columns are `vectors`,
/// ordered by decreasing singular value, together with the numerical rank.
fn left_basis(vectors: &[CVector], n: usize) -> (DMatrix<Complex64>, usize) {
    let cols = vectors.len().max(n);
    let mut m = DMatrix::<Complex64>::zeros(n, cols);
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let smax = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let rank = order.iter().filter(|&&i| smax > 0.0 && sv[i] > RANK_TOL * smax).count();
    let mut sorted = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().take(n).enumerate() {
        sorted.set_column(dst, &u.column(src));
    }
    (sorted, rank)
}

/// Numerical rank under the relative singular-value rule.
pub fn rank(vectors: &[CVector]) -> usize {
    match vectors.first() {
        None => 0,
        Some(v) => left_basis(vectors, v.len()).1,
    }
}

/// `Pi^perp_B v`: the component of `v` orthogonal to `span(basis)`.
pub fn proj_complement(basis: &[CVector], v: &CVector) -> Result<CVector> {
    check_dims(basis, v.len())?;
    if basis.is_empty() {
        return Ok(v.clone());
    }
    let (u, r) = left_basis(basis, v.len());
    let mut out = v.clone();
    for i in 0..r {
        let q = u.column(i);
        let coef = q.dotc(v);
        out -= q * coef;
    }
    Ok(out)
}

/// Orthonormal basis of `C^perp(H)`, `N_t - rank(H)` vectors.
pub fn complement_basis(h: &[CVector], n_tx: usize) -> Result<Vec<CVector>> {
    check_dims(h, n_tx)?;
    if h.is_empty() {
        return Ok((0..n_tx)
            .map(|i| {
                let mut e = CVector::zeros(n_tx);
                e[i] = Complex64::new(1.0, 0.0);
                e
            })
            .collect());
    }
    let (u, r) = left_basis(h, n_tx);
    Ok((r..n_tx).map(|i| u.column(i).into_owned()).collect())
}

/// Thin QR of `H = [h_1 .. h_Nc]` written as `H = Q L^H` with `L = R^H`
/// lower-triangular and a real positive diagonal.
pub fn qr_lower(h: &[CVector]) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n_c = h.len();
    let n_t = h.first().map(|v| v.len()).ok_or(Error::Dimension { expected: 1, got: 0 })?;
    check_dims(h, n_t)?;
    if n_c > n_t {
        return Err(Error::Dimension { expected: n_t, got: n_c });
    }
    let r = rank(h);
    if r < n_c {
        return Err(Error::RankDeficient { rank: r, needed: n_c });
    }
    let mut m = DMatrix::<Complex64>::zeros(n_t, n_c);
    for (j, v) in h.iter().enumerate() {
        m.set_column(j, v);
    }
    let qr = m.qr();
    let mut q = qr.q();
    let mut rm = qr.r();
    for k in 0..n_c {
        let d = rm[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        // Q_k <- Q_k * phase, R_k. <- conj(phase) * R_k. keeps Q R unchanged.
        for i in 0..n_t {
            q[(i, k)] *= phase;
        }
        for j in 0..n_c {
            rm[(k, j)] *= phase.conj();
        }
    }
    Ok((q, rm.adjoint()))
}

/// `a^H b`.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}
