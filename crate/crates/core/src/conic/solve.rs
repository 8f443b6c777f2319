use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{kkt_residuals, Cone, ConicProgram, SolveStatus, SolverResult};
use crate::error::Result;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: 200, verbose: false }
    }
}

/// Solves `program` to relative KKT residuals of at most `tol`.
pub fn solve(program: &ConicProgram, tol: f64) -> Result<SolverResult> {
    solve_with(program, &SolverOptions { tol, ..Default::default() })
}

fn failure(program: &ConicProgram, status: SolveStatus) -> SolverResult {
    SolverResult {
        status,
        x: vec![0.0; program.n_vars],
        y: vec![0.0; program.n_rows()],
        objective: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
    }
}

pub fn solve_with(program: &ConicProgram, opts: &SolverOptions) -> Result<SolverResult> {
    program.validate()?;
    let n = program.n_vars;

    // Presolve: constant rows of zero / nonnegative blocks are checked and dropped.
    let mut rows_i = Vec::new();
    let mut cols_j = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let mut kept_rows = Vec::new();
    let mut global_row = 0usize;
    for block in &program.blocks {
        let droppable = matches!(block.cone, Cone::Zero(_) | Cone::Nonneg(_));
        let mut kept = 0usize;
        for r in &block.rows {
            if droppable && r.terms.is_empty() {
                let bad = match block.cone {
                    Cone::Zero(_) => r.constant.abs() > opts.tol,
                    _ => r.constant < -opts.tol,
                };
                if bad {
                    return Ok(failure(program, SolveStatus::Infeasible));
                }
            } else {
                let m = b.len();
                for &(j, g) in &r.terms {
                    rows_i.push(m);
                    cols_j.push(j);
                    vals.push(-g);
                }
                b.push(r.constant);
                kept_rows.push(global_row);
                kept += 1;
            }
            global_row += 1;
        }
        match block.cone {
            Cone::Zero(_) if kept > 0 => cones.push(SupportedConeT::ZeroConeT(kept)),
            Cone::Nonneg(_) if kept > 0 => cones.push(SupportedConeT::NonnegativeConeT(kept)),
            Cone::SecondOrder(d) => cones.push(SupportedConeT::SecondOrderConeT(d)),
            Cone::Exp => cones.push(SupportedConeT::ExponentialConeT()),
            _ => {}
        }
    }
    let m = b.len();
    let a = CscMatrix::new_from_triplets(m, n, rows_i, cols_j, vals);
    let p = CscMatrix::zeros((n, n));

    let inner_tol = opts.tol * 0.1;
    let settings = DefaultSettingsBuilder::default()
        .verbose(opts.verbose)
        .max_iter(opts.max_iter)
        .tol_gap_abs(inner_tol)
        .tol_gap_rel(inner_tol)
        .tol_feas(inner_tol)
        .tol_ktratio(inner_tol.max(1e-10))
        .build()
        .map_err(|e| crate::Error::Config(format!("solver settings: {e}")))?;
    let mut solver = match DefaultSolver::new(&p, &program.objective, &a, &b, &cones, settings) {
        Ok(s) => s,
        Err(e) => return Err(crate::Error::Config(format!("solver setup: {e}"))),
    };
    solver.solve();
    let sol = &solver.solution;

    let mut y = vec![0.0; program.n_rows()];
    for (k, &g) in kept_rows.iter().enumerate() {
        y[g] = sol.z[k];
    }
    let x = sol.x.clone();
    let mut result = SolverResult {
        status: SolveStatus::NumericalFailure,
        objective: program.objective_value(&x),
        x,
        y,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations: sol.iterations,
    };
    match sol.status {
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            result.status = SolveStatus::Infeasible;
            result.objective = f64::INFINITY;
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            result.status = SolveStatus::Unbounded;
            result.objective = f64::NEG_INFINITY;
        }
        // Any other exit, including stalls, counts as optimal only when the
        // returned pair passes the independent KKT check.
        other => {
            let r = kkt_residuals(program, &result.x, &result.y);
            result.primal_residual = r.primal;
            result.dual_residual = r.dual;
            result.gap = r.gap;
            if r.max() <= opts.tol {
                result.status = SolveStatus::Optimal;
            } else {
                log::debug!("solver exit {other:?} with KKT residuals {r:?}");
            }
        }
    }
    Ok(result)
}
