//! Construction of the convex approximation around an expansion point.

use std::f64::consts::LN_2;

use crate::channel::{proj_complement, CVector, SystemConfig};
use crate::conic::{Affine, Cone, ConicProgram, ProgramBuilder};
use crate::error::{Error, Result};
use crate::rates::{pi_quadratic, PowerSplit};
use crate::scheduling::{ClusterAssignment, GreedyProblem};

use super::taylor::{exp_tangent, inner_re_im, quad_tangent};
use super::{ClusterPoint, ScaPoint};

/// Margin added to the implied upper bounds on log slacks.
const LOG_BOUND_MARGIN: f64 = 1.0;
const AUX_PREFIX: &str = "aux.";

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterVars {
    /// Interleaved `(re, im)` pairs of `w_k`.
    pub w: Vec<usize>,
    pub p1: usize,
    pub p2: usize,
    pub rate: usize,
    pub m: [usize; 3],
    pub l: [usize; 3],
    pub l4: Option<usize>,
    /// `n_kj` by `j`, `None` for `j = k`.
    pub n: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarLayout {
    pub clusters: Vec<ClusterVars>,
}

impl VarLayout {
    /// Decision variables excluding the epigraph auxiliaries.
    pub fn named_count(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| c.w.len() + 3 + 3 + 3 + usize::from(c.l4.is_some()) + c.n.iter().flatten().count())
            .sum()
    }

    pub fn beam(&self, x: &[f64], k: usize) -> CVector {
        let w = &self.clusters[k].w;
        CVector::from_iterator(w.len() / 2, w.chunks(2).map(|p| num_complex::Complex64::new(x[p[0]], x[p[1]])))
    }

    pub fn powers(&self, x: &[f64], k: usize) -> PowerSplit {
        let c = &self.clusters[k];
        PowerSplit::new(x[c.p1], x[c.p2])
    }

    pub fn rate(&self, x: &[f64], k: usize) -> f64 {
        x[self.clusters[k].rate]
    }
}

#[derive(Debug, Clone)]
pub struct ScaProgram {
    pub program: ConicProgram,
    pub layout: VarLayout,
}

impl ScaProgram {
    /// The expansion point itself as a variable vector, with the given rate
    /// values and every epigraph auxiliary set to its exponential.
    pub fn vector_at(&self, points: &[&ClusterPoint], rates: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.program.n_vars];
        for ((vars, pt), &r) in self.layout.clusters.iter().zip(points).zip(rates) {
            for (i, z) in pt.beam.iter().enumerate() {
                x[vars.w[2 * i]] = z.re;
                x[vars.w[2 * i + 1]] = z.im;
            }
            x[vars.p1] = pt.powers.strong;
            x[vars.p2] = pt.powers.weak;
            x[vars.rate] = r;
            for q in 0..3 {
                x[vars.m[q]] = pt.m[q];
                x[vars.l[q]] = pt.l[q];
            }
            if let Some(v) = vars.l4 {
                x[v] = pt.l[3];
            }
            for (j, n) in vars.n.iter().enumerate() {
                if let Some(v) = n {
                    x[*v] = pt.n[j];
                }
            }
        }
        for block in &self.program.blocks {
            if block.cone != Cone::Exp {
                continue;
            }
            let z = &block.rows[2];
            if let [(t, c)] = z.terms[..] {
                if c == 1.0 && z.constant == 0.0 && self.program.names[t].starts_with(AUX_PREFIX) {
                    x[t] = block.rows[0].eval(&x).exp();
                }
            }
        }
        x
    }
}

enum Cross {
    Var { l4: usize, l4_bar: f64, n: usize, n_bar: f64 },
    Const(f64),
}

fn new_cluster_vars(b: &mut ProgramBuilder, k: usize, n_tx: usize, n_c: usize, with_l4: bool, with_n: bool) -> ClusterVars {
    let mut w = Vec::with_capacity(2 * n_tx);
    for i in 0..n_tx {
        w.push(b.var(format!("w{k}.re{i}")));
        w.push(b.var(format!("w{k}.im{i}")));
    }
    let p1 = b.var(format!("p{k}.1"));
    let p2 = b.var(format!("p{k}.2"));
    let rate = b.var(format!("R{k}"));
    let m = [b.var(format!("m{k}.1")), b.var(format!("m{k}.2")), b.var(format!("m{k}.3"))];
    let l = [b.var(format!("l{k}.1")), b.var(format!("l{k}.2")), b.var(format!("l{k}.3"))];
    let l4 = with_l4.then(|| b.var(format!("l{k}.4")));
    let n = (0..n_c).map(|j| (with_n && j != k).then(|| b.var(format!("n{k}.{j}")))).collect();
    b.minimize_coef(rate, -1.0);
    ClusterVars { w, p1, p2, rate, m, l, l4, n }
}

fn v(i: usize) -> Affine {
    Affine::var(i)
}

/// `sum exp(u_i) <= rhs`, divided through by `scale` for conditioning.
fn scaled_exp_sum(b: &mut ProgramBuilder, label: String, us: Vec<Affine>, rhs: Affine, scale: f64) {
    let ls = scale.ln();
    let us = us.into_iter().map(|u| u.plus_const(-ls)).collect();
    b.exp_sum_le(&label, us, rhs.scale(1.0 / scale));
}

struct ClusterData<'a> {
    k: usize,
    h1: &'a CVector,
    h2: &'a CVector,
    earlier_strong: &'a [CVector],
    /// Required `p_k1 |h_k1^H w_k|^2`.
    snr_floor: f64,
    power_cap: f64,
}

fn add_cluster(
    b: &mut ProgramBuilder,
    d: &ClusterData<'_>,
    vars: &ClusterVars,
    pt: &ClusterPoint,
    noise_var: f64,
    earlier: &[Cross],
    later: &[Cross],
) {
    let k = d.k;
    let [m1, m2, m3] = vars.m;
    let [l1, l2, l3] = vars.l;
    let [mb1, mb2, mb3] = pt.m;
    let [lb1, lb2, lb3, _] = pt.l;
    let r_ln2 = v(vars.rate).scale(LN_2);

    // Strong-user SNR floor: f(l1 + m1) >= c, divided by exp(l1_bar + m1_bar).
    let a_bar = lb1 + mb1;
    b.nonneg(v(l1).term(m1, 1.0).plus_const(1.0 - a_bar - d.snr_floor * (-a_bar).exp()));

    b.exp_le(v(l1), v(vars.p1));
    b.exp_le(v(m1), quad_tangent(d.h1, &vars.w, &pt.beam));
    b.exp_le(v(m2), quad_tangent(d.h2, &vars.w, &pt.beam));
    b.exp_le(v(l3), v(vars.p2));
    b.le(v(vars.p1), exp_tangent(&v(l2), lb2));

    // Decodability of d_k2 at the strong user.
    let rhs = exp_tangent(&v(l2).term(m1, 1.0), lb2 + mb1)
        .add(&exp_tangent(&v(l3).term(m1, 1.0), lb3 + mb1))
        .plus_const(noise_var);
    let scale = noise_var + (lb2 + mb1).exp() + (lb3 + mb1).exp();
    let us = vec![r_ln2.clone().term(l2, 1.0).term(m1, 1.0), r_ln2.clone().plus_const(noise_var.ln())];
    scaled_exp_sum(b, format!("{AUX_PREFIX}k{k}.strong"), us, rhs, scale);

    // Decodability of d_k2 at the weak user with bounded interference.
    let mut us = vec![r_ln2.clone().term(l2, 1.0).term(m2, 1.0), r_ln2.clone().plus_const(noise_var.ln())];
    let mut rhs = exp_tangent(&v(l2).term(m2, 1.0), lb2 + mb2)
        .add(&exp_tangent(&v(l3).term(m2, 1.0), lb3 + mb2))
        .plus_const(noise_var);
    let mut scale = noise_var + (lb2 + mb2).exp() + (lb3 + mb2).exp();
    let ratio = v(m3).term(m1, -1.0);
    let ratio_bar = mb3 - mb1;
    for c in earlier {
        match *c {
            Cross::Var { l4, l4_bar, n, n_bar } => {
                let e = ratio.clone().term(l4, 1.0).term(n, 1.0);
                let e_bar = ratio_bar + l4_bar + n_bar;
                us.push(r_ln2.clone().add(&e));
                rhs = rhs.add(&exp_tangent(&e, e_bar));
                scale += e_bar.exp();
            }
            Cross::Const(a) if a > 0.0 => {
                us.push(r_ln2.clone().add(&ratio).plus_const(a.ln()));
                rhs = rhs.add(&exp_tangent(&ratio, ratio_bar).scale(a));
                scale += a * ratio_bar.exp();
            }
            Cross::Const(_) => {}
        }
    }
    for c in later {
        match *c {
            Cross::Var { l4, l4_bar, n, n_bar } => {
                let e = v(l4).term(n, 1.0);
                let e_bar = l4_bar + n_bar;
                us.push(r_ln2.clone().add(&e));
                rhs = rhs.add(&exp_tangent(&e, e_bar));
                scale += e_bar.exp();
            }
            Cross::Const(a) if a > 0.0 => {
                us.push(r_ln2.clone().plus_const(a.ln()));
                rhs = rhs.plus_const(a);
                scale += a;
            }
            Cross::Const(_) => {}
        }
    }
    scaled_exp_sum(b, format!("{AUX_PREFIX}k{k}.weak"), us, rhs, scale);

    // w^H Pi_k w <= f(m3).
    let (r1, i1) = inner_re_im(d.h1, &vars.w);
    let (r2, i2) = inner_re_im(d.h2, &vars.w);
    b.sum_squares_le(vec![r1, i1, r2, i2], exp_tangent(&v(m3), mb3));

    if let Some(l4) = vars.l4 {
        b.le(v(vars.p1).term(vars.p2, 1.0), exp_tangent(&v(l4), pt.l[3]));
    }

    for h in d.earlier_strong {
        let (re, im) = inner_re_im(h, &vars.w);
        b.zero(re);
        b.zero(im);
    }
    b.norm_le(vars.w.iter().map(|&i| v(i)).collect(), Affine::constant(1.0));

    // Implied upper bounds keep every slack direction bounded.
    let g1 = d.h1.norm_squared();
    let g2 = d.h2.norm_squared();
    let lp = d.power_cap.ln() + LOG_BOUND_MARGIN;
    for (var, cap) in [
        (m1, g1.ln() + LOG_BOUND_MARGIN),
        (m2, g2.ln() + LOG_BOUND_MARGIN),
        (m3, (g1 + g2).ln() + LOG_BOUND_MARGIN),
        (l1, lp),
        (l2, lp),
        (l3, lp),
    ] {
        b.le(v(var), Affine::constant(cap));
    }
    if let Some(l4) = vars.l4 {
        b.le(v(l4), Affine::constant(lp));
    }
}

fn snr_floor(h_k1: &CVector, earlier: &[CVector], config: &SystemConfig) -> Result<f64> {
    Ok(config.eta * config.cluster_power() * proj_complement(earlier, h_k1)?.norm_squared())
}

fn check_point(point: &ScaPoint, n_c: usize, n_tx: usize) -> Result<()> {
    if point.clusters.len() != n_c {
        return Err(Error::Dimension { expected: n_c, got: point.clusters.len() });
    }
    for c in &point.clusters {
        if c.beam.len() != n_tx {
            return Err(Error::Dimension { expected: n_tx, got: c.beam.len() });
        }
        let finite = c.m.iter().chain(&c.l).chain(&c.n).all(|x| x.is_finite() && x.abs() < 700.0);
        if !finite {
            return Err(Error::Precondition("expansion point has non-finite or overflowing slacks".into()));
        }
    }
    Ok(())
}

/// Joint convex approximation around `point` for all clusters.
pub fn build_p1(point: &ScaPoint, assignment: &ClusterAssignment, config: &SystemConfig) -> Result<ScaProgram> {
    let n_c = assignment.len();
    let n_tx = assignment.n_tx();
    check_point(point, n_c, n_tx)?;
    if n_c > n_tx {
        return Err(Error::Config(format!("{n_c} clusters exceed {n_tx} antennas")));
    }
    let mut b = ProgramBuilder::new();
    let multi = n_c > 1;
    let layout = VarLayout {
        clusters: (0..n_c).map(|k| new_cluster_vars(&mut b, k, n_tx, n_c, multi, multi)).collect(),
    };
    let strong = assignment.strong_channels();
    for (k, cl) in assignment.clusters.iter().enumerate() {
        let vars = &layout.clusters[k];
        let pt = &point.clusters[k];
        let cross = |j: usize| Cross::Var {
            l4: layout.clusters[j].l4.expect("multi-cluster layout"),
            l4_bar: point.clusters[j].l[3],
            n: vars.n[j].expect("cross slack"),
            n_bar: pt.n[j],
        };
        let earlier: Vec<Cross> = (0..k).map(cross).collect();
        let later: Vec<Cross> = (k + 1..n_c).map(cross).collect();
        let data = ClusterData {
            k,
            h1: &cl.strong,
            h2: &cl.weak,
            earlier_strong: &strong[..k],
            snr_floor: snr_floor(&cl.strong, &strong[..k], config)?,
            power_cap: config.total_power,
        };
        add_cluster(&mut b, &data, vars, pt, config.noise_var, &earlier, &later);

        // Cross slacks: w_j^H Pi_k w_j for j < k, |h_k2^H w_j|^2 for j > k.
        for j in 0..n_c {
            let Some(n) = vars.n[j] else { continue };
            let wj = &layout.clusters[j].w;
            let (r2, i2) = inner_re_im(&cl.weak, wj);
            let mut parts = vec![r2, i2];
            let mut cap = cl.weak.norm_squared();
            if j < k {
                let (r1, i1) = inner_re_im(&cl.strong, wj);
                parts.extend([r1, i1]);
                cap += cl.strong.norm_squared();
            }
            b.sum_squares_le(parts, exp_tangent(&v(n), pt.n[j]));
            b.le(v(n), Affine::constant(cap.ln() + LOG_BOUND_MARGIN));
        }
    }
    let mut total = Affine::default();
    for c in &layout.clusters {
        total = total.term(c.p1, 1.0).term(c.p2, 1.0);
    }
    b.le(total, Affine::constant(config.total_power));
    Ok(ScaProgram { program: b.build(), layout })
}

/// Per-cluster greedy approximation: beams of other clusters are constants,
/// each carrying `P / N_c`.
pub fn build_p2(problem: &GreedyProblem<'_>, point: &ClusterPoint) -> Result<ScaProgram> {
    let config = problem.config;
    let n_tx = problem.h_k1.len();
    check_point(&ScaPoint { clusters: vec![point.clone()] }, 1, n_tx)?;
    let cp = config.cluster_power();
    let mut b = ProgramBuilder::new();
    let vars = new_cluster_vars(&mut b, problem.k, n_tx, 1, false, false);
    let a: f64 = problem.fixed.iter().map(|w| pi_quadratic(problem.h_k1, problem.h_k2, w)).sum::<f64>() * cp;
    let later: f64 = problem.later_estimates.iter().map(|w| problem.h_k2.dotc(w).norm_sqr()).sum::<f64>() * cp;
    let data = ClusterData {
        k: problem.k,
        h1: problem.h_k1,
        h2: problem.h_k2,
        earlier_strong: problem.earlier_strong,
        snr_floor: snr_floor(problem.h_k1, problem.earlier_strong, config)?,
        power_cap: cp,
    };
    add_cluster(&mut b, &data, &vars, point, config.noise_var, &[Cross::Const(a)], &[Cross::Const(later)]);
    b.le(v(vars.p1).term(vars.p2, 1.0), Affine::constant(cp));
    Ok(ScaProgram { program: b.build(), layout: VarLayout { clusters: vec![vars] } })
}
