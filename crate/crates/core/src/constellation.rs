//! Square QAM constellations and the symmetric modulo fold.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub order: usize,
    /// Unit-average-energy points, row-major over the square grid.
    pub points: Vec<Complex64>,
    /// Modulo factor `A` of the base constellation; every point lies at an odd
    /// multiple of `A / (2 sqrt(M))` on each axis.
    pub modulo_factor: f64,
}

impl Constellation {
    pub fn box_half_width(&self) -> f64 {
        self.modulo_factor / 2.0
    }

    fn side(&self) -> usize {
        (self.order as f64).sqrt().round() as usize
    }

    /// Largest real (equivalently imaginary) coordinate.
    pub fn max_coordinate(&self) -> f64 {
        let s = self.side() as f64;
        (s - 1.0) * self.modulo_factor / (2.0 * s)
    }

    /// Distinct per-axis coordinates in increasing order.
    pub fn axis_levels(&self) -> Vec<f64> {
        let s = self.side();
        let step = self.modulo_factor / s as f64;
        (0..s).map(|i| (i as f64 - (s as f64 - 1.0) / 2.0) * step).collect()
    }

    /// Index of the point nearest to `z` in plain Euclidean distance.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Square `M`-QAM with `E|d|^2 = 1`.
pub fn make_qam(order: usize) -> Result<Constellation> {
    if !matches!(order, 4 | 16 | 64) {
        return Err(Error::Config(format!("unsupported QAM order {order}")));
    }
    let s = (order as f64).sqrt().round() as usize;
    let sf = s as f64;
    // Per-axis levels (2i - s + 1) A / (2s); mean energy 2 (A/2s)^2 (s^2 - 1)/3 = 1.
    let a = 2.0 * sf * (3.0 / (2.0 * (sf * sf - 1.0))).sqrt();
    let level = |i: usize| (2.0 * i as f64 - sf + 1.0) * a / (2.0 * sf);
    let mut points = Vec::with_capacity(order);
    for row in 0..s {
        for col in 0..s {
            points.push(Complex64::new(level(col), level(s - 1 - row)));
        }
    }
    Ok(Constellation { order, points, modulo_factor: a })
}

/// Result of a symmetric modulo fold.
///
/// Shifts follow the THP convention `value = input + c_R A + i c_I A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuloResidue {
    pub value: Complex64,
    pub shifts: (i64, i64),
}

impl ModuloResidue {
    /// Recovers the folded input, `value - (c_R + i c_I) A`.
    pub fn reconstruct(&self, a: f64) -> Complex64 {
        Complex64::new(
            self.value.re - self.shifts.0 as f64 * a,
            self.value.im - self.shifts.1 as f64 * a,
        )
    }
}

fn fold_axis(x: f64, a: f64) -> (f64, i64) {
    let half = a / 2.0;
    let mut k = ((x + half) / a).floor();
    let mut v = x - k * a;
    if v >= half {
        v -= a;
        k += 1.0;
    } else if v < -half {
        v += a;
        k -= 1.0;
    }
    (v, -(k as i64))
}

/// `mods_A(x)`: both components folded into `[-A/2, A/2)`.
pub fn mods(x: Complex64, a: f64) -> Result<ModuloResidue> {
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("modulo factor must be positive, got {a}")));
    }
    let (re, cr) = fold_axis(x.re, a);
    let (im, ci) = fold_axis(x.im, a);
    Ok(ModuloResidue { value: Complex64::new(re, im), shifts: (cr, ci) })
}

/// Folded value only; callers guarantee finite input and `a > 0`.
pub(crate) fn fold(x: Complex64, a: f64) -> Complex64 {
    Complex64::new(fold_axis(x.re, a).0, fold_axis(x.im, a).0)
}
