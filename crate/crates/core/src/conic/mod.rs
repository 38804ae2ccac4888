//! Solver-agnostic cone-program model.
//!
//! A [`ConeProgram`] holds free scalar variables and symmetric matrix
//! variables (implicitly constrained PSD), affine equalities and inequalities,
//! exponential-cone memberships and a linear objective to maximize. Complex
//! Hermitian unknowns enter through the real embedding in [`embed`].
//!
//! Matrix variables are stored as `svec`: the upper triangle column by column
//! with off-diagonal entries scaled by `sqrt(2)`, so the Frobenius inner
//! product becomes the plain dot product.

mod clarabel_backend;
pub mod dump;
pub mod embed;

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;

pub use embed::{extract_hermitian, hermitian_embed};

use crate::error::ConicError;

/// Handle to a scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarVar(usize);

/// Handle to a symmetric `dim x dim` matrix variable constrained PSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatrixVar {
    offset: usize,
    dim: usize,
}

impl ScalarVar {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Position of entry `(row, col)` with `row <= col` inside an svec.
pub(crate) fn svec_index(row: usize, col: usize) -> usize {
    debug_assert!(row <= col);
    col * (col + 1) / 2 + row
}

pub(crate) fn triangular(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

impl MatrixVar {
    pub fn dim(self) -> usize {
        self.dim
    }

    pub fn offset(self) -> usize {
        self.offset
    }

    pub fn len(self) -> usize {
        triangular(self.dim)
    }

    pub fn is_empty(self) -> bool {
        self.dim == 0
    }

    /// `tr(C X)` for a symmetric coefficient matrix `C` (upper triangle is read).
    pub fn inner(self, c: &DMatrix<f64>) -> LinExpr {
        assert_eq!(c.nrows(), self.dim, "coefficient matrix dimension");
        let mut e = LinExpr::zero();
        let s2 = std::f64::consts::SQRT_2;
        for col in 0..self.dim {
            for row in 0..=col {
                let v = if row == col { c[(row, col)] } else { s2 * c[(row, col)] };
                if v != 0.0 {
                    e.terms.push((self.offset + svec_index(row, col), v));
                }
            }
        }
        e
    }

    pub fn trace(self) -> LinExpr {
        let mut e = LinExpr::zero();
        for i in 0..self.dim {
            e.terms.push((self.offset + svec_index(i, i), 1.0));
        }
        e
    }
}

/// Affine expression `sum_i coef_i x_i + constant` over the program's variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, v) in self.terms {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        Self { terms: out, constant: self.constant }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, v)| v * x[i]).sum::<f64>() + self.constant
    }

    pub fn scale(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
        self
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }
}

impl From<ScalarVar> for LinExpr {
    fn from(v: ScalarVar) -> Self {
        Self { terms: vec![(v.0, 1.0)], constant: 0.0 }
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: Self) {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl<T: Into<LinExpr>> Add<T> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: T) -> LinExpr {
        self += rhs.into();
        self
    }
}

impl<T: Into<LinExpr>> Sub<T> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: T) -> LinExpr {
        self += rhs.into().scale(-1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, rhs: f64) -> LinExpr {
        self.scale(rhs)
    }
}

impl Mul<ScalarVar> for f64 {
    type Output = LinExpr;
    fn mul(self, rhs: ScalarVar) -> LinExpr {
        LinExpr::from(rhs).scale(self)
    }
}

impl<T: Into<LinExpr>> Add<T> for ScalarVar {
    type Output = LinExpr;
    fn add(self, rhs: T) -> LinExpr {
        LinExpr::from(self) + rhs
    }
}

impl<T: Into<LinExpr>> Sub<T> for ScalarVar {
    type Output = LinExpr;
    fn sub(self, rhs: T) -> LinExpr {
        LinExpr::from(self) - rhs
    }
}

/// One cone membership of the program.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `expr == 0`
    Zero(LinExpr),
    /// `expr >= 0`
    NonNeg(LinExpr),
    /// `(x, y, z)` in the closure of `{y e^{x/y} <= z, y > 0}`
    Exp([LinExpr; 3]),
}

/// Named handle kept for diagnostics and dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Scalar(ScalarVar),
    Matrix(MatrixVar),
}

#[derive(Debug, Clone, Default)]
pub struct ConeProgram {
    n: usize,
    vars: Vec<VarInfo>,
    matrices: Vec<MatrixVar>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl ConeProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn matrices(&self) -> &[MatrixVar] {
        &self.matrices
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn scalar_count(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| matches!(v.kind, VarKind::Scalar(_)))
            .count()
    }

    pub fn exp_cone_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| matches!(c, Constraint::Exp(_)))
            .count()
    }

    /// Adds a free scalar variable.
    pub fn scalar(&mut self, name: impl Into<String>) -> ScalarVar {
        let v = ScalarVar(self.n);
        self.n += 1;
        self.vars.push(VarInfo { name: name.into(), kind: VarKind::Scalar(v) });
        v
    }

    /// Adds a `dim x dim` symmetric matrix variable constrained PSD.
    pub fn psd_matrix(&mut self, name: impl Into<String>, dim: usize) -> MatrixVar {
        let m = MatrixVar { offset: self.n, dim };
        self.n += triangular(dim);
        self.vars.push(VarInfo { name: name.into(), kind: VarKind::Matrix(m) });
        self.matrices.push(m);
        m
    }

    pub fn eq(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) {
        self.constraints.push(Constraint::Zero(lhs.into() - rhs.into()));
    }

    /// `lhs >= rhs`
    pub fn ge(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) {
        self.constraints.push(Constraint::NonNeg(lhs.into() - rhs.into()));
    }

    /// `lhs <= rhs`
    pub fn le(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) {
        self.constraints.push(Constraint::NonNeg(rhs.into() - lhs.into()));
    }

    pub fn exp_cone(&mut self, x: impl Into<LinExpr>, y: impl Into<LinExpr>, z: impl Into<LinExpr>) {
        self.constraints.push(Constraint::Exp([x.into(), y.into(), z.into()]));
    }

    pub fn maximize(&mut self, objective: impl Into<LinExpr>) {
        self.objective = objective.into();
    }

    /// Structural checks: every referenced variable exists and all
    /// coefficients are finite.
    pub fn validate(&self) -> Result<(), ConicError> {
        let check = |e: &LinExpr, what: &str| -> Result<(), ConicError> {
            if let Some(i) = e.max_index() {
                if i >= self.n {
                    return Err(ConicError::Malformed(format!("{what} references variable {i} of {}", self.n)));
                }
            }
            if !e.constant.is_finite() || e.terms.iter().any(|&(_, v)| !v.is_finite()) {
                return Err(ConicError::Malformed(format!("{what} has a non-finite coefficient")));
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            match c {
                Constraint::Zero(e) | Constraint::NonNeg(e) => check(e, &format!("constraint {i}"))?,
                Constraint::Exp(es) => {
                    for e in es {
                        check(e, &format!("exp cone {i}"))?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, tol: &SolverTolerances) -> Result<SolveReport, ConicError> {
        self.validate()?;
        Ok(clarabel_backend::solve(self, tol))
    }
}

/// Encodes `2^x <= t` as `(x ln 2, 1, t)` in the exponential cone.
pub fn pow2_epigraph(prog: &mut ConeProgram, x: impl Into<LinExpr>, t: impl Into<LinExpr>) {
    prog.exp_cone(x.into().scale(std::f64::consts::LN_2), 1.0, t);
}

/// Encodes `2^x <= s` where `s` is the affine side being bounded from below.
///
/// Same cone as [`pow2_epigraph`]; kept separate so call sites read like the
/// constraint they impose (`s >= 2^x`).
pub fn pow2_hypograph(prog: &mut ConeProgram, x: impl Into<LinExpr>, s: impl Into<LinExpr>) {
    pow2_epigraph(prog, x, s);
}

/// Encodes `s <= ln(r)` as `(s, 1, r)` in the exponential cone.
pub fn log_hypograph(prog: &mut ConeProgram, r: impl Into<LinExpr>, s: impl Into<LinExpr>) {
    prog.exp_cone(s, 1.0, r);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    pub feasibility: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub max_iterations: u32,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-8,
            gap_abs: 1e-8,
            gap_rel: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Primal point in program variable order.
    pub x: Vec<f64>,
    /// Objective of the maximization at `x`.
    pub objective: f64,
    pub residuals: Residuals,
    pub iterations: u32,
    /// True when the backend met only its reduced-accuracy thresholds.
    pub reduced_accuracy: bool,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, v: ScalarVar) -> f64 {
        self.x[v.0]
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(&self.x)
    }

    /// Dense symmetric matrix of a matrix variable.
    pub fn matrix(&self, m: MatrixVar) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.dim, m.dim);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for col in 0..m.dim {
            for row in 0..=col {
                let v = self.x[m.offset + svec_index(row, col)];
                if row == col {
                    out[(row, col)] = v;
                } else {
                    out[(row, col)] = v * s;
                    out[(col, row)] = v * s;
                }
            }
        }
        out
    }
}
