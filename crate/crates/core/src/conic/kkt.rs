//! KKT residuals computed directly from a program and a candidate
//! primal-dual pair, without reference to any solver internals.

use super::{Cone, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// Largest cone violation of `h + G x`, relative to `1 + max |h|`.
    pub primal: f64,
    /// `max |c - G^T y|` relative to `1 + max |c|`, combined with the dual
    /// cone violation of `y`.
    pub dual: f64,
    /// `|c^T x + h^T y|` relative to `1 + |c^T x| + |h^T y|`.
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

fn soc_violation(v: &[f64]) -> f64 {
    let t = v[0];
    let r = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    // Euclidean distance to the cone.
    if r <= t {
        0.0
    } else if r <= -t {
        (t * t + r * r).sqrt()
    } else {
        (r - t) / 2f64.sqrt()
    }
}

fn exp_violation(v: &[f64]) -> f64 {
    let (x, y, z) = (v[0], v[1], v[2]);
    let sign = (-y).max(0.0).max(-z);
    if sign > 0.0 {
        return sign;
    }
    if y <= 1e-300 {
        return x.max(0.0);
    }
    let lhs = y * (x / y).exp();
    if lhs <= z {
        0.0
    } else {
        // Compare in the log domain so that large exponents stay meaningful.
        let gap_log = x - y * (z / y).ln();
        (lhs - z).min(gap_log.abs() * y.max(1.0))
    }
}

fn exp_dual_violation(v: &[f64]) -> f64 {
    let (u, w, s) = (v[0], v[1], v[2]);
    let sign = u.max(0.0).max(-s);
    if sign > 0.0 {
        return sign;
    }
    if u >= -1e-300 {
        return (-w).max(0.0);
    }
    let lhs = -u * (w / u - 1.0).exp();
    (lhs - s).max(0.0)
}

fn cone_violation(cone: Cone, v: &[f64], dual: bool) -> f64 {
    match cone {
        Cone::Zero(_) => {
            if dual {
                0.0
            } else {
                v.iter().fold(0.0, |m, x| m.max(x.abs()))
            }
        }
        Cone::Nonneg(_) => v.iter().fold(0.0, |m, x| m.max(-x)),
        Cone::SecondOrder(_) => soc_violation(v),
        Cone::Exp => {
            if dual {
                exp_dual_violation(v)
            } else {
                exp_violation(v)
            }
        }
    }
}

/// Independent evaluation of primal feasibility, dual feasibility and the
/// duality gap for `min c^T x  s.t.  h + G x in K` with dual `y in K*`.
pub fn kkt_residuals(program: &ConicProgram, x: &[f64], y: &[f64]) -> KktResiduals {
    let c = &program.objective;
    let mut grad = c.clone();
    let mut h_scale: f64 = 0.0;
    let mut h_dot_y = 0.0;
    let mut primal: f64 = 0.0;
    let mut dual_cone: f64 = 0.0;
    let mut row = 0;
    for block in &program.blocks {
        let n = block.rows.len();
        let vals: Vec<f64> = block.rows.iter().map(|r| r.eval(x)).collect();
        let ys = &y[row..row + n];
        for (r, &yi) in block.rows.iter().zip(ys) {
            h_scale = h_scale.max(r.constant.abs());
            h_dot_y += r.constant * yi;
            for &(j, g) in &r.terms {
                grad[j] -= g * yi;
            }
        }
        primal = primal.max(cone_violation(block.cone, &vals, false));
        dual_cone = dual_cone.max(cone_violation(block.cone, ys, true));
        row += n;
    }
    let c_scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let stationarity = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cx = program.objective_value(x);
    KktResiduals {
        primal: primal / (1.0 + h_scale),
        dual: (stationarity / (1.0 + c_scale)).max(dual_cone / (1.0 + y_scale)),
        gap: (cx + h_dot_y).abs() / (1.0 + cx.abs() + h_dot_y.abs()),
    }
}
