#![allow(dead_code)]

use std::f64::consts::{E, LN_2};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thpnoma::conic::{Affine, ConicProgram, ProgramBuilder};
use thpnoma::CVector;

pub fn cv(xs: &[f64]) -> CVector {
    DVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
}

pub fn random_cvec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CVector {
    DVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale)),
    )
}

pub struct Fixture {
    pub name: &'static str,
    pub program: ConicProgram,
    pub optimum: f64,
    /// Independent feasibility test used by the coarse search.
    pub feasible: fn(&[f64]) -> bool,
    /// Box for the coarse search, per variable.
    pub bounds: Vec<(f64, f64)>,
    /// Solves equality constraints for dependent coordinates of a sample.
    pub repair: Option<fn(&mut [f64])>,
}

fn v(i: usize) -> Affine {
    Affine::var(i)
}

/// Ten small programs with closed-form optima.
pub fn verification_suite() -> Vec<Fixture> {
    let mut out = Vec::new();

    // min t  s.t.  e^x <= t, x >= 0  ->  1
    let mut b = ProgramBuilder::new();
    let (x, t) = (b.var("x"), b.var("t"));
    b.minimize_coef(t, 1.0);
    b.exp_le(v(x), v(t));
    b.nonneg(v(x));
    out.push(Fixture {
        name: "exp-floor",
        program: b.build(),
        optimum: 1.0,
        feasible: |z| z[0] >= 0.0 && z[0].exp() <= z[1],
        bounds: vec![(0.0, 2.0), (0.0, 4.0)],
        repair: None,
    });

    // min t  s.t.  ||(3, 4)|| <= t  ->  5
    let mut b = ProgramBuilder::new();
    let t = b.var("t");
    b.minimize_coef(t, 1.0);
    b.norm_le(vec![Affine::constant(3.0), Affine::constant(4.0)], v(t));
    out.push(Fixture {
        name: "soc-constant",
        program: b.build(),
        optimum: 5.0,
        feasible: |z| z[0] >= 5.0,
        bounds: vec![(0.0, 10.0)],
        repair: None,
    });

    // min x  s.t.  x >= 2  ->  2
    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.minimize_coef(x, 1.0);
    b.nonneg(v(x).plus_const(-2.0));
    out.push(Fixture {
        name: "lp-bound",
        program: b.build(),
        optimum: 2.0,
        feasible: |z| z[0] >= 2.0,
        bounds: vec![(0.0, 5.0)],
        repair: None,
    });

    // min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  -2.8 at (1.6, 1.2)
    let mut b = ProgramBuilder::new();
    let (x, y) = (b.var("x"), b.var("y"));
    b.minimize_coef(x, -1.0);
    b.minimize_coef(y, -1.0);
    b.le(v(x).term(y, 2.0), Affine::constant(4.0));
    b.le(v(x).scale(3.0).term(y, 1.0), Affine::constant(6.0));
    b.nonneg(v(x));
    b.nonneg(v(y));
    out.push(Fixture {
        name: "lp-vertex",
        program: b.build(),
        optimum: -2.8,
        feasible: |z| z[0] >= 0.0 && z[1] >= 0.0 && z[0] + 2.0 * z[1] <= 4.0 && 3.0 * z[0] + z[1] <= 6.0,
        bounds: vec![(0.0, 2.0), (0.0, 2.0)],
        repair: None,
    });

    // min t  s.t.  ||(x, y)|| <= t, x + 2y = 5  ->  sqrt(5)
    let mut b = ProgramBuilder::new();
    let (x, y, t) = (b.var("x"), b.var("y"), b.var("t"));
    b.minimize_coef(t, 1.0);
    b.norm_le(vec![v(x), v(y)], v(t));
    b.zero(v(x).term(y, 2.0).plus_const(-5.0));
    out.push(Fixture {
        name: "soc-distance",
        program: b.build(),
        optimum: 5f64.sqrt(),
        feasible: |z| z[0].hypot(z[1]) <= z[2],
        bounds: vec![(0.0, 3.0), (0.0, 3.0), (0.0, 4.0)],
        repair: Some(|z| z[0] = 5.0 - 2.0 * z[1]),
    });

    // min -u  s.t.  e^u <= 1/2  ->  ln 2
    let mut b = ProgramBuilder::new();
    let u = b.var("u");
    b.minimize_coef(u, -1.0);
    b.exp_le(v(u), Affine::constant(0.5));
    out.push(Fixture {
        name: "exp-log",
        program: b.build(),
        optimum: LN_2,
        feasible: |z| z[0].exp() <= 0.5,
        bounds: vec![(-3.0, 0.0)],
        repair: None,
    });

    // Entropy: min -s  s.t.  (s, x, 1) in K_exp  (x e^{s/x} <= 1  <=>  s <= -x ln x)
    // with 0 <= x <= 1; max of -x ln x is 1/e at x = 1/e, so optimum -1/e.
    let mut b = ProgramBuilder::new();
    let (s, x) = (b.var("s"), b.var("x"));
    b.minimize_coef(s, -1.0);
    b.block(thpnoma::conic::Cone::Exp, vec![v(s), v(x), Affine::constant(1.0)]);
    b.le(v(x), Affine::constant(1.0));
    out.push(Fixture {
        name: "entropy",
        program: b.build(),
        optimum: -1.0 / E,
        feasible: |z| z[1] > 0.0 && z[1] <= 1.0 && z[1] * (z[0] / z[1]).exp() <= 1.0,
        bounds: vec![(0.0, 1.0), (1e-6, 1.0)],
        repair: None,
    });

    // Log-sum-exp: min t  s.t.  e^{x1 - t} + e^{x2 - t} + e^{x3 - t} <= 1, xi = 0  ->  ln 3
    let mut b = ProgramBuilder::new();
    let t = b.var("t");
    b.minimize_coef(t, 1.0);
    b.exp_sum_le("lse", vec![v(t).scale(-1.0); 3], Affine::constant(1.0));
    out.push(Fixture {
        name: "log-sum-exp",
        program: b.build(),
        optimum: 3f64.ln(),
        feasible: |z| 3.0 * (-z[0]).exp() <= 1.0,
        bounds: vec![(0.0, 3.0)],
        repair: None,
    });

    // Rotated: min t  s.t.  x^2 <= t, x = 1  ->  1
    let mut b = ProgramBuilder::new();
    let (x, t) = (b.var("x"), b.var("t"));
    b.minimize_coef(t, 1.0);
    b.sum_squares_le(vec![v(x)], v(t));
    b.zero(v(x).plus_const(-1.0));
    out.push(Fixture {
        name: "rotated-soc",
        program: b.build(),
        optimum: 1.0,
        feasible: |z| z[0] * z[0] <= z[1],
        bounds: vec![(0.5, 1.5), (0.0, 3.0)],
        repair: Some(|z| z[0] = 1.0),
    });

    // min (1, 2, 2) . x  s.t.  ||x|| <= 1  ->  -3
    let mut b = ProgramBuilder::new();
    let xs: Vec<usize> = (0..3).map(|i| b.var(format!("x{i}"))).collect();
    for (i, c) in [1.0, 2.0, 2.0].into_iter().enumerate() {
        b.minimize_coef(xs[i], c);
    }
    b.norm_le(xs.iter().map(|&i| v(i)).collect(), Affine::constant(1.0));
    out.push(Fixture {
        name: "norm-ball",
        program: b.build(),
        optimum: -3.0,
        feasible: |z| (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt() <= 1.0,
        bounds: vec![(-1.0, 1.0); 3],
        repair: None,
    });

    out
}

/// Best objective among random feasible points in the fixture box, improved
/// by a shrinking local search around the incumbent.
pub fn coarse_search(f: &Fixture, rng: &mut ChaCha8Rng) -> f64 {
    let obj = |z: &[f64]| f.program.objective_value(z);
    let n = f.bounds.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let sample = |center: Option<&[f64]>, radius: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut z: Vec<f64> = (0..n)
            .map(|i| {
                let (lo, hi) = f.bounds[i];
                match center {
                    None => rng.gen_range(lo..hi),
                    Some(c) => (c[i] + radius * (hi - lo) * rng.gen_range(-1.0..1.0)).clamp(lo, hi),
                }
            })
            .collect();
        if let Some(r) = f.repair {
            r(&mut z);
        }
        z
    };
    for _ in 0..20000 {
        let z = sample(None, 0.0, rng);
        if (f.feasible)(&z) && best.as_ref().map_or(true, |b| obj(&z) < b.1) {
            best = Some((z.clone(), obj(&z)));
        }
    }
    let mut radius = 0.1;
    for _ in 0..60 {
        for _ in 0..500 {
            let center = best.as_ref().map(|b| b.0.clone());
            let z = sample(center.as_deref(), radius, rng);
            if (f.feasible)(&z) && best.as_ref().map_or(true, |b| obj(&z) < b.1) {
                best = Some((z.clone(), obj(&z)));
            }
        }
        radius *= 0.8;
    }
    best.map_or(f64::INFINITY, |b| b.1)
}
