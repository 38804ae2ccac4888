//! Successive convex approximation over the semidefinite relaxation.
//!
//! Every covariance `W_j`, `Q` is a PSD variable `X` of size `2T` with
//! `W = p_max * extract_hermitian(X)`, so traces of the lifted blocks are
//! fractions of the power budget. Received-power sums are expressed in units
//! of the smallest noise power `u`, and the log-domain auxiliaries live on the
//! shifted scale `log2(power / u)` inside the cone programs. Values exposed in
//! [`ScaState`] and [`AuxVars`] are on the unshifted `log2(mW)` scale.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::conic::embed::{extract_hermitian, trace_coefficients};
use crate::conic::{
    log_hypograph, pow2_hypograph, ConeProgram, LinExpr, MatrixVar, ScalarVar, SolveReport,
    SolveStatus, SolverTolerances,
};
use crate::error::{ConicError, ScaError};
use crate::linalg::{null_space_basis, outer, CMat, CVec};
use crate::metrics::{AuxVars, CovarianceSolution, Metrics};

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOptions {
    /// SINR floor per IR user for the feasibility initialization.
    pub gamma_init: Vec<f64>,
    pub conv_tol: f64,
    pub max_iters: usize,
    /// Lower bound on every `r_j` (bits).
    pub r_floor: f64,
    pub solver: SolverTolerances,
}

impl ScaOptions {
    pub const DEFAULT_GAMMA: f64 = 0.1;

    pub fn for_config(cfg: &SystemConfig) -> Self {
        Self {
            gamma_init: vec![Self::DEFAULT_GAMMA; cfg.ir_users],
            conv_tol: 1e-4,
            max_iters: 50,
            r_floor: 1e-6,
            solver: Self::solver_defaults(),
        }
    }

    /// Tighter than the backend defaults so that the residual eigenvalues of
    /// rank-one optima stay well below the recovery rank tolerance.
    pub fn solver_defaults() -> SolverTolerances {
        SolverTolerances { feasibility: 1e-9, gap_abs: 1e-9, gap_rel: 1e-9, ..SolverTolerances::default() }
    }

    pub fn with_conv_tol(mut self, tol: f64) -> Self {
        self.conv_tol = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma_init.iter_mut().for_each(|g| *g = gamma);
        self
    }

    pub fn check(&self, cfg: &SystemConfig) -> Result<(), ScaError> {
        if self.gamma_init.len() != cfg.ir_users {
            return Err(ScaError::Options(format!(
                "gamma_init has {} entries for {} IR users",
                self.gamma_init.len(),
                cfg.ir_users
            )));
        }
        if !self.gamma_init.iter().all(|&g| g > 0.0 && g.is_finite()) {
            return Err(ScaError::Options("gamma_init entries must be positive".into()));
        }
        if !(self.conv_tol > 0.0) {
            return Err(ScaError::Options("conv_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(ScaError::Options("max_iters must be at least 1".into()));
        }
        if !(self.r_floor > 0.0) {
            return Err(ScaError::Options("r_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Linearization points and history of one SCA run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub kappa: usize,
    /// `log2(mW)` linearization point per IR user.
    pub b: Vec<f64>,
    /// `log2(mW)` linearization point per ER user.
    pub c: Vec<f64>,
    /// Subproblem optima, one per solved iteration.
    pub objective_trace: Vec<f64>,
    pub current: CovarianceSolution,
}

/// Diagnostics of one solved subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub kappa: usize,
    pub objective: f64,
    pub rates: Vec<f64>,
    pub status: SolveStatus,
    pub solver_iterations: u32,
    pub reduced_accuracy: bool,
    /// `min_j (2^{b_j} - S_b,j) / 2^{b_j}`; nonnegative when the exact
    /// interference bound holds.
    pub exact_margin_b: f64,
    /// Same for the ER totals against `2^{c_k}`; `+inf` without ER users.
    pub exact_margin_c: f64,
    /// Largest relative slack among the `2^{a_j}` cones and the `2^{d_kj}`
    /// cones of the binding eavesdropper of each user.
    pub activity_gap: f64,
    pub solution: CovarianceSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub solution: CovarianceSolution,
    pub state: ScaState,
    /// Initialization point of the feasibility problem.
    pub init: CovarianceSolution,
    /// Sum-log secrecy rate at the initialization point.
    pub init_objective: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Set when a subproblem failed and the best earlier iterate was returned.
    pub warning: Option<String>,
}

impl ScaResult {
    pub fn iterations(&self) -> usize {
        self.state.kappa
    }

    pub fn objective(&self) -> f64 {
        self.state.objective_trace.last().copied().unwrap_or(self.init_objective)
    }

    /// Initial objective followed by every subproblem optimum.
    pub fn full_trace(&self) -> Vec<f64> {
        std::iter::once(self.init_objective).chain(self.state.objective_trace.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Rx {
    Ir(usize),
    Er(usize),
    Mu(usize),
}

/// Coefficients `C` with `tr(A W) = <C, X>` for every receiver Gram `A`,
/// where `W = B extract_hermitian(X) B^H` (`B = I` when unrestricted).
#[derive(Debug, Clone)]
struct Coeffs {
    ir: Vec<DMatrix<f64>>,
    er: Vec<DMatrix<f64>>,
    mu: Vec<DMatrix<f64>>,
    half_identity: DMatrix<f64>,
}

impl Coeffs {
    fn new(ch: &ChannelSet, basis: Option<&CMat>) -> Result<Self, ConicError> {
        let map = |vs: &[CVec]| -> Result<Vec<DMatrix<f64>>, ConicError> {
            vs.iter()
                .map(|v| match basis {
                    Some(b) => trace_coefficients(&outer(&(b.adjoint() * v))),
                    None => trace_coefficients(&outer(v)),
                })
                .collect()
        };
        let dim = basis.map_or(ch.antennas(), |b| b.ncols());
        Ok(Self {
            ir: map(&ch.ir)?,
            er: map(&ch.er)?,
            mu: map(&ch.mu)?,
            half_identity: DMatrix::identity(2 * dim, 2 * dim).scale(0.5),
        })
    }

    fn get(&self, rx: Rx) -> &DMatrix<f64> {
        match rx {
            Rx::Ir(j) => &self.ir[j],
            Rx::Er(k) => &self.er[k],
            Rx::Mu(n) => &self.mu[n],
        }
    }
}

/// Scenario data shared by the feasibility and SCA programs.
struct Lifting<'a> {
    cfg: &'a SystemConfig,
    full: Coeffs,
    /// Power unit of the received-sum rows (mW).
    unit: f64,
}

struct Blocks {
    info: Vec<MatrixVar>,
    energy: MatrixVar,
    info_coeffs: Coeffs,
    /// Orthonormal columns spanning the information covariances, if restricted.
    basis: Option<CMat>,
}

impl<'a> Lifting<'a> {
    fn new(ch: &ChannelSet, cfg: &'a SystemConfig) -> Result<Self, ScaError> {
        cfg.check_dimensions().map_err(|e| ScaError::Config(e.to_string()))?;
        if !ch.matches(cfg) {
            return Err(ScaError::Config("channel counts differ from config".into()));
        }
        let unit = cfg
            .noise_ir_mw
            .iter()
            .chain(&cfg.noise_er_mw)
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(unit > 0.0 && unit.is_finite()) {
            return Err(ScaError::Config("noise powers must be positive".into()));
        }
        Ok(Self { cfg, full: Coeffs::new(ch, None)?, unit })
    }

    fn log_unit(&self) -> f64 {
        self.unit.log2()
    }

    fn blocks(&self, prog: &mut ConeProgram) -> Blocks {
        let dim = 2 * self.cfg.antennas;
        Blocks {
            info: (0..self.cfg.ir_users).map(|j| prog.psd_matrix(format!("W{j}"), dim)).collect(),
            energy: prog.psd_matrix("Q", dim),
            info_coeffs: self.full.clone(),
            basis: None,
        }
    }

    /// Information covariances confined to the null space of every ER
    /// channel, which makes `tr(G_k W_j) = 0` hold exactly while keeping a
    /// strictly feasible interior.
    fn leak_free_blocks(&self, prog: &mut ConeProgram, ch: &ChannelSet) -> Result<Blocks, ScaError> {
        let t = self.cfg.antennas;
        let basis = null_space_basis(&ch.er, t, 1e-12);
        if basis.ncols() == 0 {
            return Err(ScaError::Config("ER channels span the whole antenna space".into()));
        }
        let dim = 2 * basis.ncols();
        Ok(Blocks {
            info: (0..self.cfg.ir_users).map(|j| prog.psd_matrix(format!("W{j}"), dim)).collect(),
            energy: prog.psd_matrix("Q", 2 * t),
            info_coeffs: Coeffs::new(ch, Some(&basis))?,
            basis: Some(basis),
        })
    }

    /// Received power (mW) at `rx` from the information beams kept by `keep`
    /// plus the energy signal.
    fn received(&self, blocks: &Blocks, rx: Rx, keep: impl Fn(usize) -> bool) -> LinExpr {
        let mut e = blocks.energy.inner(self.full.get(rx));
        for (l, w) in blocks.info.iter().enumerate() {
            if keep(l) {
                e += w.inner(blocks.info_coeffs.get(rx));
            }
        }
        e.scale(self.cfg.p_max_mw)
    }

    /// Interference plus noise at IR user `j` (mW).
    fn ir_interference(&self, blocks: &Blocks, j: usize) -> LinExpr {
        self.received(blocks, Rx::Ir(j), |l| l != j)
            + (self.cfg.mbs_interference_ir_mw[j] + self.cfg.noise_ir_mw[j])
    }

    fn ir_total(&self, blocks: &Blocks, j: usize) -> LinExpr {
        self.received(blocks, Rx::Ir(j), |_| true)
            + (self.cfg.mbs_interference_ir_mw[j] + self.cfg.noise_ir_mw[j])
    }

    fn er_total(&self, blocks: &Blocks, k: usize) -> LinExpr {
        self.received(blocks, Rx::Er(k), |_| true)
            + (self.cfg.mbs_interference_er_mw[k] + self.cfg.noise_er_mw[k])
    }

    fn er_interference(&self, blocks: &Blocks, k: usize, j: usize) -> LinExpr {
        self.received(blocks, Rx::Er(k), |l| l != j)
            + (self.cfg.mbs_interference_er_mw[k] + self.cfg.noise_er_mw[k])
    }

    /// Harvesting, macro-user interference and power budget, each row
    /// normalized by its threshold.
    fn add_common(&self, prog: &mut ConeProgram, blocks: &Blocks) {
        let cfg = self.cfg;
        for k in 0..cfg.er_users {
            let target = cfg.eh_threshold_mw[k];
            if target <= 0.0 {
                continue;
            }
            let harvested = self.er_total(blocks, k) - cfg.noise_er_mw[k];
            prog.ge(harvested.scale(cfg.efficiency[k] / target), 1.0);
        }
        for n in 0..cfg.macro_users {
            let interference = self.received(blocks, Rx::Mu(n), |_| true);
            let eta = cfg.mu_threshold_mw[n];
            if eta > 0.0 {
                prog.le(interference.scale(1.0 / eta), 1.0);
            } else {
                prog.le(interference.scale(1.0 / self.unit), 0.0);
            }
        }
        let mut power = blocks.energy.inner(&self.full.half_identity);
        for w in &blocks.info {
            power += w.inner(&blocks.info_coeffs.half_identity);
        }
        prog.le(power, 1.0);
    }

    fn extract(&self, report: &SolveReport, blocks: &Blocks) -> CovarianceSolution {
        let pmax = self.cfg.p_max_mw;
        let lift = |m: MatrixVar| extract_hermitian(&report.matrix(m)).map(|z| z * pmax);
        let info = blocks
            .info
            .iter()
            .map(|&m| match &blocks.basis {
                Some(b) => {
                    let w = b * lift(m) * b.adjoint();
                    (&w + w.adjoint()).scale(0.5)
                }
                None => lift(m),
            })
            .collect();
        let mut sol = CovarianceSolution { info, energy: lift(blocks.energy), aux: None };
        // the budget row holds only to the solver's relative tolerance, which
        // is about 1e-6 mW at the reference budget; pull it back exactly
        let total = sol.total_power();
        if total > pmax {
            let shrink = pmax / total;
            sol.info.iter_mut().for_each(|w| *w = w.map(|z| z * shrink));
            sol.energy = sol.energy.map(|z| z * shrink);
        }
        sol
    }
}

fn solve_program(prog: &ConeProgram, tol: &SolverTolerances) -> Result<SolveReport, ScaError> {
    Ok(prog.solve(tol)?)
}

fn feasibility_program(
    lift: &Lifting,
    ch: &ChannelSet,
    opts: &ScaOptions,
) -> Result<(ConeProgram, Blocks), ScaError> {
    let cfg = lift.cfg;
    let mut prog = ConeProgram::new();
    let blocks = lift.leak_free_blocks(&mut prog, ch)?;
    for j in 0..cfg.ir_users {
        let signal = blocks.info[j].inner(blocks.info_coeffs.get(Rx::Ir(j))).scale(cfg.p_max_mw);
        let floor = lift.ir_interference(&blocks, j).scale(opts.gamma_init[j]);
        prog.ge((signal - floor).scale(1.0 / lift.unit), 0.0);
    }
    lift.add_common(&mut prog, &blocks);
    Ok((prog, blocks))
}

/// Feasibility problem with an SINR floor per IR user and zero information
/// leakage to every ER user.
pub fn build_feasibility_init(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    opts: &ScaOptions,
) -> Result<ConeProgram, ScaError> {
    opts.check(cfg)?;
    let lift = Lifting::new(ch, cfg)?;
    Ok(feasibility_program(&lift, ch, opts)?.0)
}

pub fn solve_feasibility_init(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    opts: &ScaOptions,
) -> Result<CovarianceSolution, ScaError> {
    opts.check(cfg)?;
    let lift = Lifting::new(ch, cfg)?;
    let (prog, blocks) = feasibility_program(&lift, ch, opts)?;
    let report = solve_program(&prog, &opts.solver)?;
    if !report.is_optimal() {
        return Err(ScaError::InitInfeasible(report.status));
    }
    Ok(lift.extract(&report, &blocks))
}

/// Initial linearization points (`log2(mW)`): the exact interference level
/// at each IR user and the total received power at each ER user.
pub fn init_linearization(
    sol0: &CovarianceSolution,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<(Vec<f64>, Vec<f64>), ScaError> {
    let m = Metrics::new(sol0, ch, cfg).map_err(|e| ScaError::Config(e.to_string()))?;
    let log = |v: f64| -> Result<f64, ScaError> {
        if v > 0.0 {
            Ok(v.log2())
        } else {
            Err(ScaError::Config(format!("nonpositive power {v:e} in linearization")))
        }
    };
    let b = (0..cfg.ir_users)
        .map(|j| log(m.ir_interference(j).expect("index in range")))
        .collect::<Result<_, _>>()?;
    let c = (0..cfg.er_users)
        .map(|k| log(m.er_total(k).expect("index in range")))
        .collect::<Result<_, _>>()?;
    Ok((b, c))
}

/// Variable handles of a convexified subproblem.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConeProgram,
    pub info: Vec<MatrixVar>,
    pub energy: MatrixVar,
    pub a: Vec<ScalarVar>,
    pub b: Vec<ScalarVar>,
    pub c: Vec<ScalarVar>,
    /// `d[k][j]`.
    pub d: Vec<Vec<ScalarVar>>,
    pub r: Vec<ScalarVar>,
    pub s: Vec<ScalarVar>,
}

/// Convex subproblem around the linearization points in `state`.
pub fn build_subproblem(
    state: &ScaState,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    opts: &ScaOptions,
) -> Result<Subproblem, ScaError> {
    opts.check(cfg)?;
    if state.b.len() != cfg.ir_users || state.c.len() != cfg.er_users {
        return Err(ScaError::Config("linearization points do not match the user counts".into()));
    }
    if !state.b.iter().chain(&state.c).all(|v| v.is_finite()) {
        return Err(ScaError::Config("linearization points must be finite".into()));
    }
    let lift = Lifting::new(ch, cfg)?;
    build_with(&lift, state, opts)
}

fn build_with(lift: &Lifting, state: &ScaState, opts: &ScaOptions) -> Result<Subproblem, ScaError> {
    let cfg = lift.cfg;
    let (jn, kn) = (cfg.ir_users, cfg.er_users);
    let shift = lift.log_unit();
    let inv_u = 1.0 / lift.unit;

    let mut prog = ConeProgram::new();
    let blocks = lift.blocks(&mut prog);
    let a: Vec<_> = (0..jn).map(|j| prog.scalar(format!("a{j}"))).collect();
    let b: Vec<_> = (0..jn).map(|j| prog.scalar(format!("b{j}"))).collect();
    let c: Vec<_> = (0..kn).map(|k| prog.scalar(format!("c{k}"))).collect();
    let d: Vec<Vec<_>> = (0..kn)
        .map(|k| (0..jn).map(|j| prog.scalar(format!("d{k}_{j}"))).collect())
        .collect();
    let r: Vec<_> = (0..jn).map(|j| prog.scalar(format!("r{j}"))).collect();
    let s: Vec<_> = (0..jn).map(|j| prog.scalar(format!("s{j}"))).collect();

    for j in 0..jn {
        if kn == 0 {
            prog.ge(a[j] - b[j] - r[j], 0.0);
        }
        for k in 0..kn {
            prog.ge(a[j] - b[j] - c[k] + d[k][j] - r[j], 0.0);
        }
        pow2_hypograph(&mut prog, a[j], lift.ir_total(&blocks, j).scale(inv_u));

        // S_b / (u 2^{b_bar}) <= ln2 (b - b_bar) + 1
        let bar = state.b[j] - shift;
        let lhs = lift.ir_interference(&blocks, j).scale(inv_u * (-bar).exp2());
        prog.le(lhs, LN_2 * b[j] + (1.0 - LN_2 * bar));

        prog.ge(r[j], opts.r_floor);
        log_hypograph(&mut prog, r[j], s[j]);
    }
    for k in 0..kn {
        let bar = state.c[k] - shift;
        let lhs = lift.er_total(&blocks, k).scale(inv_u * (-bar).exp2());
        prog.le(lhs, LN_2 * c[k] + (1.0 - LN_2 * bar));
        for j in 0..jn {
            pow2_hypograph(&mut prog, d[k][j], lift.er_interference(&blocks, k, j).scale(inv_u));
        }
    }
    lift.add_common(&mut prog, &blocks);
    prog.maximize(s.iter().fold(LinExpr::zero(), |acc, &v| acc + v));

    Ok(Subproblem { program: prog, info: blocks.info, energy: blocks.energy, a, b, c, d, r, s })
}

/// First-order Taylor under-estimator of `2^x` at `x_bar`.
pub fn taylor_pow2(x: f64, x_bar: f64) -> f64 {
    x_bar.exp2() * (LN_2 * (x - x_bar) + 1.0)
}

struct Evaluated {
    solution: CovarianceSolution,
    objective: f64,
    exact_margin_b: f64,
    exact_margin_c: f64,
    activity_gap: f64,
}

fn evaluate(
    lift: &Lifting,
    sub: &Subproblem,
    report: &SolveReport,
    ch: &ChannelSet,
) -> Result<Evaluated, ScaError> {
    let cfg = lift.cfg;
    let shift = lift.log_unit();
    let blocks = Blocks {
        info: sub.info.clone(),
        energy: sub.energy,
        info_coeffs: lift.full.clone(),
        basis: None,
    };
    let mut solution = lift.extract(report, &blocks);
    let val = |v: ScalarVar| report.value(v);
    let aux = AuxVars {
        r: sub.r.iter().map(|&v| val(v)).collect(),
        a: sub.a.iter().map(|&v| val(v) + shift).collect(),
        b: sub.b.iter().map(|&v| val(v) + shift).collect(),
        c: sub.c.iter().map(|&v| val(v) + shift).collect(),
        d: sub.d.iter().map(|row| row.iter().map(|&v| val(v) + shift).collect()).collect(),
    };
    let objective: f64 = aux.r.iter().map(|r| r.ln()).sum();

    let m = Metrics::new(&solution, ch, cfg).map_err(|e| ScaError::Config(e.to_string()))?;
    let rel = |bound_log2: f64, value: f64| {
        let bound = bound_log2.exp2();
        (bound - value) / bound
    };
    let exact_margin_b = (0..cfg.ir_users)
        .map(|j| rel(aux.b[j], m.ir_interference(j).expect("index in range")))
        .fold(f64::INFINITY, f64::min);
    let exact_margin_c = (0..cfg.er_users)
        .map(|k| rel(aux.c[k], m.er_total(k).expect("index in range")))
        .fold(f64::INFINITY, f64::min);

    let mut activity_gap = 0.0f64;
    for j in 0..cfg.ir_users {
        let total = m.ir_total(j).expect("index in range");
        activity_gap = activity_gap.max(((total - aux.a[j].exp2()) / total).abs());
        // only the eavesdropper attaining the chain minimum constrains r_j
        let binding = (0..cfg.er_users).min_by(|&k1, &k2| {
            let slack = |k: usize| aux.a[j] - aux.b[j] - aux.c[k] + aux.d[k][j];
            slack(k1).total_cmp(&slack(k2))
        });
        if let Some(k) = binding {
            let sum = m.er_interference(k, j).expect("index in range");
            activity_gap = activity_gap.max(((sum - aux.d[k][j].exp2()) / sum).abs());
        }
    }
    solution.aux = Some(aux);
    Ok(Evaluated { solution, objective, exact_margin_b, exact_margin_c, activity_gap })
}

/// Runs the full SCA procedure from the feasibility initialization.
pub fn sca_solve(ch: &ChannelSet, cfg: &SystemConfig, opts: &ScaOptions) -> Result<ScaResult, ScaError> {
    opts.check(cfg)?;
    let lift = Lifting::new(ch, cfg)?;
    let init = solve_feasibility_init(ch, cfg, opts)?;
    let init_objective = Metrics::new(&init, ch, cfg)
        .and_then(|m| m.sum_log_secrecy())
        .map_err(|e| ScaError::Config(format!("initial point has no valid objective: {e}")))?;
    let (b, c) = init_linearization(&init, ch, cfg)?;

    let mut state = ScaState { kappa: 0, b, c, objective_trace: Vec::new(), current: init.clone() };
    let mut records = Vec::new();
    let mut converged = false;
    let mut warning = None;
    let mut previous = init_objective;

    while state.kappa < opts.max_iters {
        let sub = build_with(&lift, &state, opts)?;
        let report = solve_program(&sub.program, &opts.solver)?;
        if !report.is_optimal() {
            let msg = format!(
                "subproblem {} ended with status {:?}; keeping iterate {}",
                state.kappa + 1,
                report.status,
                state.kappa
            );
            log::warn!("{msg}");
            warning = Some(msg);
            break;
        }
        let ev = evaluate(&lift, &sub, &report, ch)?;
        let aux = ev.solution.aux.as_ref().expect("evaluate fills aux");
        state.b = aux.b.clone();
        state.c = aux.c.clone();
        state.kappa += 1;
        state.objective_trace.push(ev.objective);
        state.current = ev.solution.clone();
        records.push(IterationRecord {
            kappa: state.kappa,
            objective: ev.objective,
            rates: aux.r.clone(),
            status: report.status,
            solver_iterations: report.iterations,
            reduced_accuracy: report.reduced_accuracy,
            exact_margin_b: ev.exact_margin_b,
            exact_margin_c: ev.exact_margin_c,
            activity_gap: ev.activity_gap,
            solution: ev.solution,
        });
        let change = (ev.objective - previous).abs() / previous.abs().max(1.0);
        previous = ev.objective;
        if change < opts.conv_tol {
            converged = true;
            break;
        }
    }

    Ok(ScaResult {
        solution: state.current.clone(),
        state,
        init,
        init_objective,
        records,
        converged,
        warning,
    })
}
