//! Standard-form conic programs: minimize `c^T x` subject to affine blocks
//! `h + G x` lying in zero, nonnegative, second-order or exponential cones.
//!
//! The exponential cone uses the convention `(x, y, z) in K_exp` iff
//! `y exp(x / y) <= z, y > 0`, together with its closure.

mod kkt;
mod solve;
mod text;

use serde::{Deserialize, Serialize};

pub use kkt::{kkt_residuals, KktResiduals};
pub use solve::{solve, solve_with, SolverOptions, DEFAULT_TOL};
pub use text::{dump, load};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    Zero(usize),
    Nonneg(usize),
    /// `(t, x)` with `||x|| <= t`; the dimension includes `t`.
    SecondOrder(usize),
    Exp,
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(n) | Cone::Nonneg(n) | Cone::SecondOrder(n) => n,
            Cone::Exp => 3,
        }
    }

    fn keyword(&self) -> &'static str {
        match self {
            Cone::Zero(_) => "zero",
            Cone::Nonneg(_) => "nonneg",
            Cone::SecondOrder(_) => "soc",
            Cone::Exp => "exp",
        }
    }
}

/// Sparse affine expression `constant + sum coef * x[var]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn var(i: usize) -> Self {
        Self { constant: 0.0, terms: vec![(i, 1.0)] }
    }

    pub fn term(mut self, var: usize, coef: f64) -> Self {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
        self
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn add(mut self, other: &Affine) -> Self {
        self.constant += other.constant;
        self.terms.extend_from_slice(&other.terms);
        self
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.constant *= s;
        for t in &mut self.terms {
            t.1 *= s;
        }
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    /// Merges duplicate variables and drops exact zeros, ordered by index.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, c) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub cone: Cone,
    pub rows: Vec<Affine>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<ConeBlock>,
    pub names: Vec<String>,
}

impl ConicProgram {
    pub fn n_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.objective.len() != self.n_vars {
            return Err(Error::Dimension { expected: self.n_vars, got: self.objective.len() });
        }
        if !self.names.is_empty() && self.names.len() != self.n_vars {
            return Err(Error::Dimension { expected: self.n_vars, got: self.names.len() });
        }
        for b in &self.blocks {
            if b.rows.len() != b.cone.dim() {
                return Err(Error::Dimension { expected: b.cone.dim(), got: b.rows.len() });
            }
            if matches!(b.cone, Cone::SecondOrder(0)) {
                return Err(Error::Config("second-order cone of dimension 0".into()));
            }
            for r in &b.rows {
                if !r.constant.is_finite() {
                    return Err(Error::NonFinite);
                }
                for &(i, c) in &r.terms {
                    if i >= self.n_vars {
                        return Err(Error::Dimension { expected: self.n_vars, got: i + 1 });
                    }
                    if !c.is_finite() {
                        return Err(Error::NonFinite);
                    }
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// Incremental construction of a [`ConicProgram`].
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    program: ConicProgram,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, name: impl Into<String>) -> usize {
        self.program.names.push(name.into());
        self.program.objective.push(0.0);
        self.program.n_vars += 1;
        self.program.n_vars - 1
    }

    pub fn n_vars(&self) -> usize {
        self.program.n_vars
    }

    pub fn minimize_coef(&mut self, var: usize, coef: f64) {
        self.program.objective[var] += coef;
    }

    pub fn block(&mut self, cone: Cone, rows: Vec<Affine>) {
        debug_assert_eq!(cone.dim(), rows.len());
        self.program.blocks.push(ConeBlock { cone, rows: rows.into_iter().map(Affine::compact).collect() });
    }

    /// `a >= 0`.
    pub fn nonneg(&mut self, a: Affine) {
        self.block(Cone::Nonneg(1), vec![a]);
    }

    /// `lhs <= rhs`.
    pub fn le(&mut self, lhs: Affine, rhs: Affine) {
        self.nonneg(rhs.add(&lhs.scale(-1.0)));
    }

    /// `a = 0`.
    pub fn zero(&mut self, a: Affine) {
        self.block(Cone::Zero(1), vec![a]);
    }

    /// `exp(u) <= t`.
    pub fn exp_le(&mut self, u: Affine, t: Affine) {
        self.block(Cone::Exp, vec![u, Affine::constant(1.0), t]);
    }

    /// `||xs|| <= t`.
    pub fn norm_le(&mut self, xs: Vec<Affine>, t: Affine) {
        let mut rows = Vec::with_capacity(xs.len() + 1);
        rows.push(t);
        rows.extend(xs);
        let n = rows.len();
        self.block(Cone::SecondOrder(n), rows);
    }

    /// `sum xs_i^2 <= a`, written as `||(a - 1, 2 xs)|| <= a + 1`.
    pub fn sum_squares_le(&mut self, xs: Vec<Affine>, a: Affine) {
        let mut rows = Vec::with_capacity(xs.len() + 2);
        rows.push(a.clone().plus_const(1.0));
        rows.push(a.plus_const(-1.0));
        rows.extend(xs.into_iter().map(|x| x.scale(2.0)));
        let n = rows.len();
        self.block(Cone::SecondOrder(n), rows);
    }

    /// `sum_i exp(u_i) <= rhs` through one auxiliary epigraph variable per term.
    pub fn exp_sum_le(&mut self, label: &str, us: Vec<Affine>, rhs: Affine) {
        let mut total = Affine::default();
        for (i, u) in us.into_iter().enumerate() {
            let t = self.var(format!("{label}.t{i}"));
            self.exp_le(u, Affine::var(t));
            total = total.term(t, 1.0);
        }
        self.le(total, rhs);
    }

    pub fn build(self) -> ConicProgram {
        self.program
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Dual multipliers, one per constraint row in block order.
    pub y: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: u32,
}

impl SolverResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_compact_merges() {
        let a = Affine::var(2).term(0, 1.0).term(2, -1.0).term(0, 2.0).compact();
        assert_eq!(a.terms, vec![(0, 3.0)]);
    }

    #[test]
    fn builder_counts() {
        let mut b = ProgramBuilder::new();
        let x = b.var("x");
        b.exp_sum_le("s", vec![Affine::var(x), Affine::var(x).scale(-1.0)], Affine::constant(3.0));
        let p = b.build();
        assert_eq!(p.n_vars, 3);
        assert_eq!(p.n_rows(), 7);
        p.validate().unwrap();
    }
}
