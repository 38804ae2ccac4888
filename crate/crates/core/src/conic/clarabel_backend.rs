//! Adapter onto the Clarabel interior-point solver.
//!
//! Clarabel solves `min q'x  s.t.  A x + s = b, s in K`. Each model cone
//! `expr in K` becomes rows `-a` with right-hand side `c0` so that
//! `s = a'x + c0`.

use clarabel::algebra::CscMatrix;
use openblas_src as _;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{triangular, ConeProgram, Constraint, LinExpr, Residuals, SolveReport, SolveStatus, SolverTolerances};

struct Rows {
    cols: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn push(&mut self, e: &LinExpr) {
        let row = self.b.len();
        let e = e.clone().compact();
        for &(col, v) in e.terms() {
            self.rows.push(row);
            self.cols.push(col);
            self.vals.push(-v);
        }
        self.b.push(e.constant_part());
    }
}

pub(super) fn solve(prog: &ConeProgram, tol: &SolverTolerances) -> SolveReport {
    let n = prog.num_variables();
    let mut rows = Rows { cols: Vec::new(), rows: Vec::new(), vals: Vec::new(), b: Vec::new() };
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    let zeros: Vec<&LinExpr> = prog
        .constraints()
        .iter()
        .filter_map(|c| match c {
            Constraint::Zero(e) => Some(e),
            _ => None,
        })
        .collect();
    let nonneg: Vec<&LinExpr> = prog
        .constraints()
        .iter()
        .filter_map(|c| match c {
            Constraint::NonNeg(e) => Some(e),
            _ => None,
        })
        .collect();
    if !zeros.is_empty() {
        zeros.iter().for_each(|e| rows.push(e));
        cones.push(SupportedConeT::ZeroConeT(zeros.len()));
    }
    if !nonneg.is_empty() {
        nonneg.iter().for_each(|e| rows.push(e));
        cones.push(SupportedConeT::NonnegativeConeT(nonneg.len()));
    }
    for c in prog.constraints() {
        if let Constraint::Exp(es) = c {
            es.iter().for_each(|e| rows.push(e));
            cones.push(SupportedConeT::ExponentialConeT());
        }
    }
    for m in prog.matrices() {
        for k in 0..triangular(m.dim()) {
            let row = rows.b.len();
            rows.rows.push(row);
            rows.cols.push(m.offset() + k);
            rows.vals.push(-1.0);
            rows.b.push(0.0);
        }
        cones.push(SupportedConeT::PSDTriangleConeT(m.dim()));
    }

    let m_rows = rows.b.len();
    let a = CscMatrix::new_from_triplets(m_rows, n, rows.rows, rows.cols, rows.vals);
    let p = CscMatrix::<f64>::zeros((n, n));
    let mut q = vec![0.0; n];
    for &(i, v) in prog.objective().clone().compact().terms() {
        q[i] = -v;
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(tol.max_iterations)
        .tol_feas(tol.feasibility)
        .tol_gap_abs(tol.gap_abs)
        .tol_gap_rel(tol.gap_rel)
        .build()
        .expect("valid Clarabel settings");

    let mut solver = match DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("Clarabel rejected the problem: {e}");
            return failure(n);
        }
    };
    solver.solve();

    let sol = &solver.solution;
    let (status, reduced) = match sol.status {
        SolverStatus::Solved => (SolveStatus::Optimal, false),
        SolverStatus::AlmostSolved => (SolveStatus::Optimal, true),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            (SolveStatus::Infeasible, false)
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            (SolveStatus::Unbounded, false)
        }
        _ => (SolveStatus::NumericalFailure, false),
    };
    let info = &solver.info;
    let x = sol.x.clone();
    let objective = if status == SolveStatus::Optimal {
        prog.objective().eval(&x)
    } else {
        f64::NAN
    };
    SolveReport {
        status,
        x,
        objective,
        residuals: Residuals {
            primal: info.res_primal,
            dual: info.res_dual,
            gap_abs: info.gap_abs,
            gap_rel: info.gap_rel,
        },
        iterations: info.iterations,
        reduced_accuracy: reduced,
    }
}

fn failure(n: usize) -> SolveReport {
    SolveReport {
        status: SolveStatus::NumericalFailure,
        x: vec![f64::NAN; n],
        objective: f64::NAN,
        residuals: Residuals::default(),
        iterations: 0,
        reduced_accuracy: false,
    }
}
