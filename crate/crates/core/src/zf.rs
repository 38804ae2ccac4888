//! Zero-forcing comparison scheme.
//!
//! Each information beam is the projection of its own channel onto the null
//! space of the other IR channels and every ER channel, so eavesdroppers see
//! no information signal. Only the beam powers and an energy covariance that
//! stays invisible to the IR users remain to be optimized.

use nalgebra::DMatrix;

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::conic::embed::{extract_hermitian, trace_coefficients};
use crate::conic::{log_hypograph, pow2_hypograph, ConeProgram, LinExpr, SolverTolerances};
use crate::error::ZfError;
use crate::linalg::{null_space_basis, outer, psd_project, quad_form, CMat, CVec};
use crate::metrics::{sum_log_secrecy, BeamSolution, CovarianceSolution};
use crate::recovery::energy_beams;

/// Projections shorter than this fraction of `|h_j|` are degenerate.
pub const DEGENERATE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfDirections {
    /// Unit-norm direction per IR user; zero for degenerate users.
    pub wdir: Vec<CVec>,
    /// `|h_j^H wdir_j|^2`.
    pub effective_gain: Vec<f64>,
    /// Users whose channel lies in the span of the nulled channels.
    pub degenerate: Vec<usize>,
}

impl ZfDirections {
    /// Fails on the first degenerate user.
    pub fn require_all(self) -> Result<Self, ZfError> {
        match self.degenerate.first() {
            Some(&user) => Err(ZfError::Degenerate { user }),
            None => Ok(self),
        }
    }
}

/// Stacked rows `[h_l^H (l != j); g_k^H]` of the channels beam `j` must null.
fn nulled_matrix(ch: &ChannelSet, j: usize) -> CMat {
    let rows: Vec<&CVec> = ch
        .ir
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != j)
        .map(|(_, h)| h)
        .chain(&ch.er)
        .collect();
    let t = ch.antennas();
    CMat::from_fn(rows.len(), t, |r, c| rows[r][c].conj())
}

/// `normalize((I - H^+ H) h_j)` per IR user.
pub fn zf_directions(ch: &ChannelSet, cfg: &SystemConfig) -> Result<ZfDirections, ZfError> {
    let t = cfg.antennas;
    let nulled = cfg.ir_users - 1 + cfg.er_users;
    if t <= nulled {
        return Err(ZfError::TooFewAntennas { antennas: t, nulled });
    }
    let mut wdir = Vec::with_capacity(cfg.ir_users);
    let mut effective_gain = Vec::with_capacity(cfg.ir_users);
    let mut degenerate = Vec::new();
    for (j, h) in ch.ir.iter().enumerate() {
        let hz = nulled_matrix(ch, j);
        let proj = if hz.nrows() == 0 {
            h.clone()
        } else {
            let pinv = hz.clone().pseudo_inverse(1e-12).expect("nonnegative epsilon");
            let once = h - &pinv * (&hz * h);
            // a second pass removes the round-off left by the first
            &once - &pinv * (&hz * &once)
        };
        let norm = proj.norm();
        if norm <= DEGENERATE_TOL * h.norm() {
            degenerate.push(j);
            wdir.push(CVec::zeros(t));
            effective_gain.push(0.0);
            continue;
        }
        let dir = proj.unscale(norm);
        effective_gain.push(dir.dotc(h).norm_sqr());
        wdir.push(dir);
    }
    Ok(ZfDirections { wdir, effective_gain, degenerate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfSolution {
    pub beams: BeamSolution,
    pub covariance: CovarianceSolution,
    /// Information beam powers (mW).
    pub powers: Vec<f64>,
    /// Optimum of the power-allocation program over non-degenerate users.
    pub program_objective: f64,
    /// Sum-log secrecy rate of `beams`; `None` when some user gets no rate.
    pub objective: Option<f64>,
    pub degenerate: Vec<usize>,
}

/// Optimal beam powers and IR-invisible energy covariance for fixed directions.
pub fn zf_power_allocation(
    dirs: &ZfDirections,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    tol: &SolverTolerances,
) -> Result<ZfSolution, ZfError> {
    let t = cfg.antennas;
    let jn = cfg.ir_users;
    let pmax = cfg.p_max_mw;
    let unit = cfg
        .noise_ir_mw
        .iter()
        .chain(&cfg.noise_er_mw)
        .copied()
        .fold(f64::INFINITY, f64::min);

    // Q = B Y B^H with B an orthonormal basis of the IR null space, so
    // h_j^H Q h_j = 0 holds exactly and Y keeps a strict interior
    let basis = null_space_basis(&ch.ir, t, 1e-12);
    let m = basis.ncols();
    let reduced = |v: &CVec| -> CVec { basis.adjoint() * v };

    let mut prog = ConeProgram::new();
    // powers in units of p_max
    let p: Vec<_> = (0..jn).map(|j| prog.scalar(format!("p{j}"))).collect();
    let y = (m > 0).then(|| prog.psd_matrix("Y", 2 * m));
    let energy_rx = |v: &CVec| -> Result<LinExpr, ZfError> {
        Ok(match y {
            Some(y) => y.inner(&trace_coefficients(&outer(&reduced(v)))?).scale(pmax),
            None => LinExpr::zero(),
        })
    };
    let beam_power = |v: &CVec| -> LinExpr {
        (0..jn).fold(LinExpr::zero(), |acc, l| acc + (pmax * dirs.wdir[l].dotc(v).norm_sqr()) * p[l])
    };

    for &pj in &p {
        prog.ge(pj, 0.0);
    }
    for (k, g) in ch.er.iter().enumerate() {
        let target = cfg.eh_threshold_mw[k];
        if target <= 0.0 {
            continue;
        }
        let rx = beam_power(g) + energy_rx(g)? + cfg.mbs_interference_er_mw[k];
        prog.ge(rx.scale(cfg.efficiency[k] / target), 1.0);
    }
    for (n, i) in ch.mu.iter().enumerate() {
        let rx = beam_power(i) + energy_rx(i)?;
        let eta = cfg.mu_threshold_mw[n];
        if eta > 0.0 {
            prog.le(rx.scale(1.0 / eta), 1.0);
        } else {
            prog.le(rx.scale(1.0 / unit), 0.0);
        }
    }
    let energy_power = match y {
        Some(y) => y.inner(&DMatrix::identity(2 * m, 2 * m).scale(0.5)),
        None => LinExpr::zero(),
    };
    let total = p.iter().fold(energy_power, |acc, &v| acc + v);
    prog.le(total, 1.0);

    let mut objective = LinExpr::zero();
    for j in 0..jn {
        if dirs.degenerate.contains(&j) {
            prog.eq(p[j], 0.0);
            continue;
        }
        let snr_per_unit = pmax * dirs.effective_gain[j] / (cfg.mbs_interference_ir_mw[j] + cfg.noise_ir_mw[j]);
        // 2^{rate} <= 1 + snr, s <= ln(rate)
        let rate = prog.scalar(format!("rate{j}"));
        let s = prog.scalar(format!("s{j}"));
        pow2_hypograph(&mut prog, rate, snr_per_unit * p[j] + 1.0);
        log_hypograph(&mut prog, rate, s);
        objective += LinExpr::from(s);
    }
    prog.maximize(objective);

    let report = prog.solve(tol)?;
    if !report.is_optimal() {
        return Err(ZfError::Infeasible(report.status));
    }

    let powers: Vec<f64> = p.iter().map(|&v| report.value(v).max(0.0) * pmax).collect();
    let energy = match y {
        Some(y) => {
            let inner = psd_project(&extract_hermitian(&report.matrix(y)).map(|z| z * pmax));
            let q = &basis * inner * basis.adjoint();
            (&q + q.adjoint()).scale(0.5)
        }
        None => CMat::zeros(t, t),
    };

    let info: Vec<CVec> = (0..jn).map(|j| dirs.wdir[j].scale(powers[j].sqrt())).collect();
    let beams = BeamSolution { info, energy: energy_beams(&energy, 1e-12).unwrap_or_default() };
    let covariance = CovarianceSolution { info: beams.info.iter().map(outer).collect(), energy, aux: None };
    let objective = sum_log_secrecy(&covariance, ch, cfg).ok();
    Ok(ZfSolution {
        beams,
        covariance,
        powers,
        program_objective: report.objective,
        objective,
        degenerate: dirs.degenerate.clone(),
    })
}

/// Directions followed by power allocation.
pub fn zf_solve(ch: &ChannelSet, cfg: &SystemConfig, tol: &SolverTolerances) -> Result<ZfSolution, ZfError> {
    let dirs = zf_directions(ch, cfg)?;
    zf_power_allocation(&dirs, ch, cfg, tol)
}

/// `|h^H Q h|` relative to `tr(Q) |h|^2`; zero for an empty covariance.
pub fn ir_visibility(q: &CMat, h: &CVec) -> f64 {
    let scale = crate::linalg::real_trace(q) * h.norm_squared();
    if scale > 0.0 {
        quad_form(q, h).abs() / scale
    } else {
        0.0
    }
}
