//! Superposition coding, sequential Tomlinson-Harashima encoding over the
//! clusters, and the expanded-constellation receivers of both users.

use num_complex::Complex64;

use crate::channel::{inner, CVector};
use crate::constellation::{fold, mods, Constellation};
use crate::error::{Error, Result};

/// Largest tolerated leakage `|(H_1^{<k})^H w_k|` for THP encoding.
pub const NULL_TOL: f64 = 1e-8;
/// Smallest usable effective gain.
pub const GAIN_FLOOR: f64 = 1e-10;
const TIE_TOL: f64 = 1e-9;

pub fn superpose(d1: Complex64, d2: Complex64, p1: f64, p2: f64) -> Complex64 {
    d1 * p1.sqrt() + d2 * p2.sqrt()
}

/// Per-axis levels of `sqrt(p1) d1 + sqrt(p2) d2`, sorted.
fn superposed_levels(c: &Constellation, p1: f64, p2: f64) -> Vec<f64> {
    let base = c.axis_levels();
    let mut lv: Vec<f64> = base
        .iter()
        .flat_map(|&u| base.iter().map(move |&v| p1.sqrt() * u + p2.sqrt() * v))
        .collect();
    lv.sort_by(f64::total_cmp);
    lv
}

/// Modulo factor `B` for a superposed cluster signal: the span of the
/// superposed grid plus its smallest non-zero level gap, so the periodic
/// extension keeps the grid's own minimum spacing across the wrap.
pub fn modulo_factor(c: &Constellation, p1: f64, p2: f64) -> Result<f64> {
    if !(p1 >= 0.0 && p2 >= 0.0) || p1 + p2 <= 0.0 {
        return Err(Error::Config("superposition powers must be non-negative and not both zero".into()));
    }
    let lv = superposed_levels(c, p1, p2);
    let span = lv[lv.len() - 1] - lv[0];
    let scale = (p1.sqrt() + p2.sqrt()) * c.modulo_factor;
    let gap = lv
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 1e-12 * scale)
        .fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() { span + gap } else { scale })
}

/// Sequential THP over clusters with a common modulo factor.
pub fn thp_encode(
    symbols: &[Complex64],
    beams: &[CVector],
    strong_channels: &[CVector],
    b: f64,
) -> Result<Vec<Complex64>> {
    thp_encode_with_factors(symbols, beams, strong_channels, &vec![b; symbols.len()])
}

/// Sequential THP over clusters, folding cluster `k` with its own factor
/// `b[k]`:
/// `x~_k = mods_B(x_k - sum_{j<k} (h_k1^H w_j / h_k1^H w_k) x~_j)`, `x~_1 = x_1`.
pub fn thp_encode_with_factors(
    symbols: &[Complex64],
    beams: &[CVector],
    strong_channels: &[CVector],
    b: &[f64],
) -> Result<Vec<Complex64>> {
    let n = symbols.len();
    for len in [beams.len(), strong_channels.len(), b.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    check_null_constraint(beams, strong_channels)?;
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    for k in 0..n {
        let h = &strong_channels[k];
        let gain = inner(h, &beams[k]);
        if gain.norm() < GAIN_FLOOR {
            return Err(Error::DegenerateGain { cluster: k, gain: gain.norm() });
        }
        if k == 0 {
            out.push(symbols[0]);
            continue;
        }
        let mut v = symbols[k];
        for (j, xt) in out.iter().enumerate() {
            v -= inner(h, &beams[j]) / gain * xt;
        }
        out.push(mods(v, b[k])?.value);
    }
    Ok(out)
}

/// Checks `|(H_1^{<k})^H w_k| <= NULL_TOL` for every cluster.
pub fn check_null_constraint(beams: &[CVector], strong_channels: &[CVector]) -> Result<()> {
    for (k, w) in beams.iter().enumerate() {
        let leak: f64 = strong_channels[..k].iter().map(|h| inner(h, w).norm_sqr()).sum::<f64>().sqrt();
        if leak > NULL_TOL {
            return Err(Error::Precondition(format!(
                "beam {k} leaks {leak:e} into earlier strong users"
            )));
        }
    }
    Ok(())
}

fn torus_dist(z: Complex64, c: Complex64, b: f64) -> f64 {
    fold(z - c, b).norm()
}

/// Nearest candidate in torus distance; `Err(DecisionTie)` when a candidate
/// with a different label is equally close.
fn nearest_on_torus<L: PartialEq + Copy>(
    z: Complex64,
    candidates: impl Iterator<Item = (Complex64, L)>,
    b: f64,
) -> Result<L> {
    let mut best: Option<(f64, L)> = None;
    let mut runner_up = f64::INFINITY;
    let mut labelled: Vec<(f64, L)> = Vec::new();
    for (c, label) in candidates {
        let d = torus_dist(z, c, b);
        labelled.push((d, label));
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, label)),
        }
    }
    let (bd, bl) = best.ok_or(Error::DecisionTie)?;
    for &(d, l) in &labelled {
        if l != bl {
            runner_up = runner_up.min(d);
        }
    }
    if runner_up - bd <= TIE_TOL * b {
        return Err(Error::DecisionTie);
    }
    Ok(bl)
}

fn normalize(y: Complex64, gain: Complex64, b: f64) -> Result<Complex64> {
    if !(y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if gain.norm() < GAIN_FLOOR {
        return Err(Error::DegenerateGain { cluster: 0, gain: gain.norm() });
    }
    Ok(fold(y / gain, b))
}

/// Strong-user SIC receiver. Returns `(d2_hat, d1_hat)` as constellation
/// indices: the weak symbol is decided against the full superposed grid, then
/// removed before the strong symbol is decided.
pub fn receive_strong(
    y: Complex64,
    gain: Complex64,
    b: f64,
    c: &Constellation,
    p1: f64,
    p2: f64,
) -> Result<(usize, usize)> {
    if p2 <= 0.0 {
        return Err(Error::NoWeakSignal);
    }
    let z = normalize(y, gain, b)?;
    let m = c.points.len();
    let grid = (0..m * m).map(|i| {
        let (i1, i2) = (i / m, i % m);
        (superpose(c.points[i1], c.points[i2], p1, p2), i2)
    });
    let d2 = nearest_on_torus(z, grid, b)?;
    let r = fold(z - c.points[d2] * p2.sqrt(), b);
    let d1 = nearest_on_torus(r, c.points.iter().enumerate().map(|(i, p)| (p * p1.sqrt(), i)), b)?;
    Ok((d2, d1))
}

/// Weak-user receiver: decides `d2` against `sqrt(p2) d2`, treating the
/// strong user's component as noise.
pub fn receive_weak(
    y: Complex64,
    gain: Complex64,
    b: f64,
    c: &Constellation,
    _p1: f64,
    p2: f64,
) -> Result<usize> {
    if p2 <= 0.0 {
        return Err(Error::NoWeakSignal);
    }
    let z = normalize(y, gain, b)?;
    nearest_on_torus(z, c.points.iter().enumerate().map(|(i, p)| (p * p2.sqrt(), i)), b)
}

/// One transmitted frame: per-cluster data, powers, superposed and precoded
/// symbols.
#[derive(Debug, Clone)]
pub struct SuperposedFrame {
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    pub powers: Vec<(f64, f64)>,
    pub x: Vec<Complex64>,
    pub x_tilde: Vec<Complex64>,
    pub modulo: Vec<f64>,
}

impl SuperposedFrame {
    pub fn encode(
        c: &Constellation,
        d1: Vec<usize>,
        d2: Vec<usize>,
        powers: &[(f64, f64)],
        beams: &[CVector],
        strong_channels: &[CVector],
    ) -> Result<Self> {
        let x: Vec<Complex64> = d1
            .iter()
            .zip(&d2)
            .zip(powers)
            .map(|((&a, &b), &(p1, p2))| superpose(c.points[a], c.points[b], p1, p2))
            .collect();
        let modulo = powers.iter().map(|&(p1, p2)| modulo_factor(c, p1, p2)).collect::<Result<Vec<_>>>()?;
        let x_tilde = thp_encode_with_factors(&x, beams, strong_channels, &modulo)?;
        Ok(Self { d1, d2, powers: powers.to_vec(), x, x_tilde, modulo })
    }

    /// Transmit vector `sum_k w_k x~_k`.
    pub fn transmit(&self, beams: &[CVector]) -> CVector {
        let n = beams[0].len();
        beams.iter().zip(&self.x_tilde).fold(CVector::zeros(n), |acc, (w, &s)| acc + w * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::qr_lower;
    use crate::constellation::make_qam;
    use nalgebra::DVector;

    fn cv(xs: &[(f64, f64)]) -> CVector {
        DVector::from_iterator(xs.len(), xs.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hand_example_two_antennas() {
        let s = 0.5f64.sqrt();
        let h = vec![cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(s, 0.0), (s, 0.0)])];
        let w = vec![cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (1.0, 0.0)])];
        let xt = thp_encode(&[re(0.5), re(0.5)], &w, &h, 2.0 * 2f64.sqrt()).unwrap();
        assert!((xt[0] - re(0.5)).norm() < 1e-15);
        assert!(xt[1].norm() < 1e-15);
    }

    #[test]
    fn single_cluster_passthrough() {
        let h = vec![cv(&[(0.3, 0.1), (1.0, -2.0)])];
        let x = Complex64::new(5.0, -7.0);
        let xt = thp_encode(&[x], &h, &h, 1.0).unwrap();
        assert_eq!(xt[0], x);
    }

    #[test]
    fn orthogonal_channels_no_precoding() {
        let h = vec![cv(&[(2.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (0.0, 1.5)])];
        let w: Vec<CVector> = h.iter().map(|v| v.unscale(v.norm())).collect();
        let x = [Complex64::new(0.3, -0.2), Complex64::new(-0.4, 0.6)];
        let xt = thp_encode(&x, &w, &h, 2.0).unwrap();
        assert!((xt[0] - x[0]).norm() < 1e-15 && (xt[1] - x[1]).norm() < 1e-15);
    }

    #[test]
    fn violated_null_constraint_is_rejected() {
        let h = vec![cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (1.0, 0.0)])];
        let w = vec![cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(1.0, 0.0), (0.0, 0.0)])];
        assert!(matches!(thp_encode(&[re(0.1), re(0.1)], &w, &h, 2.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn degenerate_gain_is_rejected() {
        let h = vec![cv(&[(1.0, 0.0), (0.0, 0.0)])];
        let w = vec![cv(&[(0.0, 0.0), (1.0, 0.0)])];
        assert!(matches!(thp_encode(&[re(0.1)], &w, &h, 2.0), Err(Error::DegenerateGain { .. })));
    }

    #[test]
    fn qr_beams_reproduce_textbook_recursion() {
        use crate::channel::{generate_population, SystemConfig};
        let pop = generate_population(&SystemConfig::default(), 21).unwrap();
        let h = &pop.strong_set[..3];
        let (q, l) = qr_lower(h).unwrap();
        let w: Vec<CVector> = (0..3).map(|k| q.column(k).into_owned()).collect();
        let x = [Complex64::new(0.7, -0.7), Complex64::new(-0.7, 0.7), Complex64::new(0.7, 0.7)];
        let b = 2.0 * 2f64.sqrt();
        let xt = thp_encode(&x, &w, h, b).unwrap();
        let mut want = vec![x[0]];
        for k in 1..3 {
            let mut v = x[k];
            for j in 0..k {
                v -= l[(k, j)] / l[(k, k)] * want[j];
            }
            want.push(mods(v, b).unwrap().value);
        }
        for k in 0..3 {
            assert!((xt[k] - want[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn modulo_factor_gives_regular_grid_for_ratio_four() {
        let c = make_qam(4).unwrap();
        // sqrt(p2) = 2 sqrt(p1): superposed levels -3b, -b, b, 3b with b = sqrt(p1/2).
        let b = modulo_factor(&c, 0.2, 0.8).unwrap();
        assert!((b - 8.0 * (0.1f64).sqrt()).abs() < 1e-12);
        // With no strong component the base factor is scaled back.
        assert!((modulo_factor(&c, 0.0, 1.0).unwrap() - c.modulo_factor).abs() < 1e-12);
    }

    fn all_pairs_noiseless(p1: f64, p2: f64) -> Vec<Result<(usize, usize)>> {
        let c = make_qam(4).unwrap();
        let b = modulo_factor(&c, p1, p2).unwrap();
        let gain = Complex64::new(0.8, -1.3);
        let mut out = Vec::new();
        for i1 in 0..4 {
            for i2 in 0..4 {
                let x = superpose(c.points[i1], c.points[i2], p1, p2);
                out.push(receive_strong(gain * x, gain, b, &c, p1, p2).map(|(d2, d1)| {
                    assert_eq!((d1, d2), (i1, i2));
                    (d2, d1)
                }));
            }
        }
        out
    }

    #[test]
    fn strong_receiver_exact_when_grid_is_distinct() {
        // Oracle: the 16 superposed points are pairwise distinct, so each
        // noiseless point is its own unique nearest centroid.
        assert!(all_pairs_noiseless(0.2, 0.8).iter().all(|r| r.is_ok()));
    }

    #[test]
    fn strong_receiver_flags_equal_power_collisions() {
        // With p1 = p2 = 0.5 on 4-QAM, (d1, d2) = (+, -) and (-, +) per axis
        // land on the same point: 8 of the 16 pairs share a location.
        let results = all_pairs_noiseless(0.5, 0.5);
        let ties = results.iter().filter(|r| matches!(r, Err(Error::DecisionTie))).count();
        assert!(ties > 0);
        assert!(results.iter().all(|r| r.is_ok() || matches!(r, Err(Error::DecisionTie))));
    }

    #[test]
    fn receivers_are_modulo_invariant() {
        let c = make_qam(4).unwrap();
        let (p1, p2) = (0.2, 0.8);
        let b = modulo_factor(&c, p1, p2).unwrap();
        let gain = Complex64::new(-0.4, 0.9);
        for i1 in 0..4 {
            for i2 in 0..4 {
                let x = superpose(c.points[i1], c.points[i2], p1, p2);
                let y = gain * x;
                let shifted = gain * (x + Complex64::new(b, b));
                assert_eq!(
                    receive_strong(y, gain, b, &c, p1, p2).unwrap(),
                    receive_strong(shifted, gain, b, &c, p1, p2).unwrap()
                );
                let shifted = gain * (x + b);
                assert_eq!(receive_weak(y, gain, b, &c, p1, p2).unwrap(), i2);
                assert_eq!(receive_weak(shifted, gain, b, &c, p1, p2).unwrap(), i2);
            }
        }
    }

    #[test]
    fn weak_receiver_needs_power() {
        let c = make_qam(4).unwrap();
        let g = Complex64::new(1.0, 0.0);
        assert!(matches!(receive_weak(g, g, 2.0, &c, 1.0, 0.0), Err(Error::NoWeakSignal)));
        assert!(matches!(receive_strong(g, g, 2.0, &c, 1.0, 0.0), Err(Error::NoWeakSignal)));
    }
}
