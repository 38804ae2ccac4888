//! Monte Carlo harness: convergence traces over power budgets, harvesting
//! threshold sweeps against zero forcing, and single-trial diagnostic dumps.
//!
//! Trial `t` under master seed `s` draws its channels from a ChaCha8 stream
//! keyed by `(s, t)` only, so the same trial sees the same channels at every
//! power budget, every threshold and for both schemes.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{generate_channels, ChannelSet};
use crate::config::{mw_to_dbm, SystemConfig};
use crate::conic::SolverTolerances;
use crate::error::{ExperimentError, ScaError};
use crate::linalg::CVec;
use crate::metrics::{BeamSolution, ConstraintAudit, CovarianceSolution, Metrics};
use crate::recovery::{rank_profile, recover_beams, RecoveryMethod, RecoveryOptions};
use crate::sca::{sca_solve, ScaOptions};
use crate::zf::zf_solve;

/// Absolute (mW) and relative PSD slack of the audit behind the feasible flag.
pub const AUDIT_TOL: f64 = 1e-6;

pub const DEFAULT_PMAX_DBM: [f64; 3] = [24.0, 27.0, 30.0];
pub const DEFAULT_TRIALS: u64 = 100;

pub const CONVERGENCE_HEADER: [&str; 4] = ["pmax_dbm", "trial", "iteration", "objective"];
pub const SWEEP_HEADER: [&str; 7] = [
    "varpi_mw",
    "trial",
    "scheme",
    "feasible",
    "objective",
    "min_harvested_mw",
    "max_mu_interference_mw",
];

/// `0.25, 0.5, ..., 2.5` mW.
pub fn default_varpi_mw() -> Vec<f64> {
    (1..=10).map(|i| 0.25 * i as f64).collect()
}

/// Channel and randomization stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub conv_tol: f64,
    pub max_iters: usize,
    pub recovery: RecoveryOptions,
    pub zf_solver: SolverTolerances,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            conv_tol: 1e-4,
            max_iters: 50,
            recovery: RecoveryOptions::default(),
            zf_solver: SolverTolerances::default(),
        }
    }
}

impl Settings {
    pub fn sca_options(&self, cfg: &SystemConfig) -> ScaOptions {
        ScaOptions::for_config(cfg).with_conv_tol(self.conv_tol).with_max_iters(self.max_iters)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Proposed,
    Zf,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Zf => "zf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub max_info_rank: usize,
    pub min_dominance: f64,
    pub energy_rank: usize,
    pub method: RecoveryMethod,
    pub feasible_candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub trial: u64,
    pub seed: u64,
    pub config: SystemConfig,
    pub scheme: Scheme,
    /// Set only when the beams pass [`ConstraintAudit`] at [`AUDIT_TOL`].
    pub feasible: bool,
    pub status: String,
    pub warning: Option<String>,
    pub iterations: usize,
    /// Proposed: initialization objective followed by every subproblem
    /// optimum. ZF: the single allocation objective.
    pub objective_trace: Vec<f64>,
    /// Beam-level sum of logarithmic secrecy rates.
    pub objective: Option<f64>,
    /// Sum-log secrecy of the final covariances (proposed only).
    pub sdr_objective: Option<f64>,
    /// Smallest relative slack of the exact log-power constraints over all
    /// iterates (proposed only).
    pub min_taylor_margin: Option<f64>,
    pub secrecy_rates: Vec<f64>,
    pub harvested_mw: Vec<f64>,
    pub mu_interference_mw: Vec<f64>,
    pub solve_seconds: f64,
    pub rank: Option<RankSummary>,
    pub audit: Option<ConstraintAudit>,
    pub beams: Option<BeamSolution>,
}

impl ExperimentRecord {
    fn empty(trial: u64, seed: u64, cfg: &SystemConfig, scheme: Scheme, status: &str) -> Self {
        Self {
            trial,
            seed,
            config: cfg.clone(),
            scheme,
            feasible: false,
            status: status.to_string(),
            warning: None,
            iterations: 0,
            objective_trace: Vec::new(),
            objective: None,
            sdr_objective: None,
            min_taylor_margin: None,
            secrecy_rates: Vec::new(),
            harvested_mw: Vec::new(),
            mu_interference_mw: Vec::new(),
            solve_seconds: 0.0,
            rank: None,
            audit: None,
            beams: None,
        }
    }

    pub fn pmax_dbm(&self) -> f64 {
        mw_to_dbm(self.config.p_max_mw)
    }

    /// Harvesting threshold of the first ER user (thresholds are homogeneous
    /// in every sweep).
    pub fn varpi_mw(&self) -> f64 {
        self.config.eh_threshold_mw.first().copied().unwrap_or(0.0)
    }

    pub fn min_harvested_mw(&self) -> Option<f64> {
        self.harvested_mw.iter().copied().reduce(f64::min)
    }

    pub fn max_mu_interference_mw(&self) -> Option<f64> {
        self.mu_interference_mw.iter().copied().reduce(f64::max)
    }

    /// Fills rates, harvested powers, interference and the audit from beams;
    /// returns whether the audit passed.
    fn measure(&mut self, beams: &CovarianceSolution, ch: &ChannelSet, cfg: &SystemConfig) -> bool {
        let Ok(m) = Metrics::new(beams, ch, cfg) else {
            return false;
        };
        self.secrecy_rates = m.secrecy_rates();
        self.harvested_mw = (0..cfg.er_users).filter_map(|k| m.harvested_power(k).ok()).collect();
        self.mu_interference_mw = (0..cfg.macro_users).filter_map(|n| m.mu_interference(n).ok()).collect();
        let audit = ConstraintAudit::evaluate(beams, ch, cfg).ok();
        let passed = audit.as_ref().is_some_and(|a| a.passes(AUDIT_TOL, AUDIT_TOL));
        self.audit = audit;
        passed
    }
}

/// SCA, beam recovery and the beam-level audit on one channel set.
pub fn run_proposed(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    settings: &Settings,
    rng: &mut ChaCha8Rng,
    trial: u64,
    seed: u64,
) -> ExperimentRecord {
    let mut rec = ExperimentRecord::empty(trial, seed, cfg, Scheme::Proposed, "ok");
    let start = Instant::now();
    let sca = sca_solve(ch, cfg, &settings.sca_options(cfg));
    let sca = match sca {
        Ok(r) => r,
        Err(e) => {
            rec.status = match e {
                ScaError::InitInfeasible(_) => "init-infeasible".into(),
                other => format!("error: {other}"),
            };
            rec.solve_seconds = start.elapsed().as_secs_f64();
            return rec;
        }
    };
    rec.iterations = sca.iterations();
    rec.objective_trace = sca.full_trace();
    rec.warning = sca.warning.clone();
    rec.min_taylor_margin = sca
        .records
        .iter()
        .map(|r| r.exact_margin_b.min(r.exact_margin_c))
        .reduce(f64::min);

    let recovered = recover_beams(&sca.solution, ch, cfg, &settings.recovery, rng);
    rec.solve_seconds = start.elapsed().as_secs_f64();
    let recovered = match recovered {
        Ok(r) => r,
        Err(e) => {
            rec.status = format!("recovery-failed: {e}");
            return rec;
        }
    };
    rec.sdr_objective = Some(recovered.sdr_objective);
    rec.rank = Some(RankSummary {
        max_info_rank: recovered.profiles.iter().map(|p| p.numeric_rank).max().unwrap_or(0),
        min_dominance: recovered.profiles.iter().map(|p| p.dominance).fold(1.0, f64::min),
        energy_rank: recovered.energy_rank,
        method: recovered.method,
        feasible_candidates: recovered.feasible_candidates,
    });
    let passed = rec.measure(&recovered.beams.to_covariance(), ch, cfg);
    rec.beams = Some(recovered.beams);
    if passed {
        rec.feasible = true;
        rec.objective = Some(recovered.objective);
    } else {
        rec.status = "audit-failed".into();
    }
    rec
}

/// Zero-forcing directions, power allocation and the audit on one channel set.
pub fn run_zf(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    settings: &Settings,
    trial: u64,
    seed: u64,
) -> ExperimentRecord {
    let mut rec = ExperimentRecord::empty(trial, seed, cfg, Scheme::Zf, "ok");
    let start = Instant::now();
    let zf = zf_solve(ch, cfg, &settings.zf_solver);
    rec.solve_seconds = start.elapsed().as_secs_f64();
    let zf = match zf {
        Ok(z) => z,
        Err(e) => {
            rec.status = format!("zf-infeasible: {e}");
            return rec;
        }
    };
    rec.iterations = 1;
    let passed = rec.measure(&zf.beams.to_covariance(), ch, cfg);
    rec.beams = Some(zf.beams.clone());
    match zf.objective {
        Some(obj) if passed => {
            rec.feasible = true;
            rec.objective = Some(obj);
            rec.objective_trace = vec![obj];
        }
        Some(_) => rec.status = "audit-failed".into(),
        None => rec.status = format!("zf-degenerate: users {:?}", zf.degenerate),
    }
    rec
}

fn draw(cfg: &SystemConfig, seed: u64, trial: u64) -> Result<(ChannelSet, ChaCha8Rng), String> {
    let mut rng = trial_rng(seed, trial);
    generate_channels(cfg, &mut rng).map(|ch| (ch, rng)).map_err(|e| e.to_string())
}

/// Proposed scheme at every budget in `pmax_dbm` for trials `0..trials`.
///
/// Records are ordered by budget, then trial.
pub fn run_convergence(
    cfg: &SystemConfig,
    pmax_dbm: &[f64],
    trials: u64,
    seed: u64,
    settings: &Settings,
) -> Vec<ExperimentRecord> {
    let jobs: Vec<(f64, u64)> = pmax_dbm
        .iter()
        .flat_map(|&p| (0..trials).map(move |t| (p, t)))
        .collect();
    jobs.par_iter()
        .map(|&(p, trial)| {
            let cfg = cfg.clone().with_p_max_dbm(p);
            match draw(&cfg, seed, trial) {
                Ok((ch, mut rng)) => run_proposed(&ch, &cfg, settings, &mut rng, trial, seed),
                Err(e) => ExperimentRecord::empty(trial, seed, &cfg, Scheme::Proposed, &format!("error: {e}")),
            }
        })
        .collect()
}

/// Both schemes at every threshold in `varpi_mw` for trials `0..trials`.
///
/// Records are ordered by threshold, then trial, with the proposed record of
/// each pair first.
pub fn run_threshold_sweep(
    cfg: &SystemConfig,
    varpi_mw: &[f64],
    trials: u64,
    seed: u64,
    settings: &Settings,
) -> Vec<ExperimentRecord> {
    let jobs: Vec<(f64, u64)> = varpi_mw
        .iter()
        .flat_map(|&v| (0..trials).map(move |t| (v, t)))
        .collect();
    let pairs: Vec<[ExperimentRecord; 2]> = jobs
        .par_iter()
        .map(|&(v, trial)| {
            let cfg = cfg.clone().with_eh_threshold(v);
            match draw(&cfg, seed, trial) {
                Ok((ch, mut rng)) => [
                    run_proposed(&ch, &cfg, settings, &mut rng, trial, seed),
                    run_zf(&ch, &cfg, settings, trial, seed),
                ],
                Err(e) => {
                    let status = format!("error: {e}");
                    [
                        ExperimentRecord::empty(trial, seed, &cfg, Scheme::Proposed, &status),
                        ExperimentRecord::empty(trial, seed, &cfg, Scheme::Zf, &status),
                    ]
                }
            }
        })
        .collect();
    pairs.into_iter().flatten().collect()
}

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.14e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    fmt_float(x.unwrap_or(f64::NAN))
}

/// One row per trace entry of every proposed record; iteration 0 is the
/// initialization. Trials without a trace contribute no rows.
pub fn write_convergence_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGENCE_HEADER)?;
    for rec in records.iter().filter(|r| r.scheme == Scheme::Proposed) {
        let pmax = fmt_float(rec.pmax_dbm());
        for (i, obj) in rec.objective_trace.iter().enumerate() {
            w.write_record([pmax.clone(), rec.trial.to_string(), i.to_string(), fmt_float(*obj)])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for rec in records {
        let measured = |x: Option<f64>| if rec.feasible { fmt_opt(x) } else { fmt_float(f64::NAN) };
        w.write_record([
            fmt_float(rec.varpi_mw()),
            rec.trial.to_string(),
            rec.scheme.label().to_string(),
            rec.feasible.to_string(),
            fmt_opt(rec.objective),
            measured(rec.min_harvested_mw()),
            measured(rec.max_mu_interference_mw()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeStats {
    pub feasible: usize,
    pub feasibility_rate: f64,
    /// Mean objective over this scheme's feasible trials.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub varpi_mw: f64,
    pub trials: usize,
    pub proposed: SchemeStats,
    pub zf: SchemeStats,
    /// Trials on which both schemes are feasible.
    pub paired: usize,
    pub paired_mean_proposed: Option<f64>,
    pub paired_mean_zf: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates sweep records per threshold, in order of first appearance.
pub fn summarize_sweep(records: &[ExperimentRecord]) -> Vec<SweepSummary> {
    let mut varpis: Vec<f64> = Vec::new();
    for r in records {
        if !varpis.contains(&r.varpi_mw()) {
            varpis.push(r.varpi_mw());
        }
    }
    varpis
        .into_iter()
        .map(|v| {
            let at = |s: Scheme| records.iter().filter(move |r| r.varpi_mw() == v && r.scheme == s);
            let trials = at(Scheme::Proposed).count().max(at(Scheme::Zf).count());
            let stats = |s: Scheme| {
                let feasible: Vec<f64> = at(s).filter_map(|r| r.objective.filter(|_| r.feasible)).collect();
                SchemeStats {
                    feasible: feasible.len(),
                    feasibility_rate: if trials > 0 { feasible.len() as f64 / trials as f64 } else { 0.0 },
                    mean: mean(feasible.into_iter()),
                }
            };
            let paired: Vec<(f64, f64)> = at(Scheme::Proposed)
                .filter(|p| p.feasible)
                .filter_map(|p| {
                    let z = at(Scheme::Zf).find(|z| z.trial == p.trial && z.feasible)?;
                    Some((p.objective?, z.objective?))
                })
                .collect();
            SweepSummary {
                varpi_mw: v,
                trials,
                proposed: stats(Scheme::Proposed),
                zf: stats(Scheme::Zf),
                paired: paired.len(),
                paired_mean_proposed: mean(paired.iter().map(|p| p.0)),
                paired_mean_zf: mean(paired.iter().map(|p| p.1)),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summary: &[SweepSummary], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "varpi_mw",
        "trials",
        "proposed_feasibility",
        "proposed_mean",
        "zf_feasibility",
        "zf_mean",
        "paired",
        "paired_mean_proposed",
        "paired_mean_zf",
    ])?;
    for s in summary {
        w.write_record([
            fmt_float(s.varpi_mw),
            s.trials.to_string(),
            fmt_float(s.proposed.feasibility_rate),
            fmt_opt(s.proposed.mean),
            fmt_float(s.zf.feasibility_rate),
            fmt_opt(s.zf.mean),
            s.paired.to_string(),
            fmt_opt(s.paired_mean_proposed),
            fmt_opt(s.paired_mean_zf),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Prefix of every wall-clock line in a [`run_single`] report.
pub const TIMING_PREFIX: &str = "time ";

/// The report without its wall-clock lines.
pub fn strip_timing(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with(TIMING_PREFIX))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_float(x)).collect::<Vec<_>>().join(" ")
}

fn vector(v: &CVec) -> String {
    v.iter()
        .map(|z| format!("({},{})", fmt_float(z.re), fmt_float(z.im)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn covariance_section(out: &mut String, sol: &CovarianceSolution, ch: &ChannelSet, cfg: &SystemConfig) {
    match Metrics::new(sol, ch, cfg) {
        Ok(m) => {
            let _ = writeln!(out, "secrecy_rates_bits {}", join(&m.secrecy_rates()));
            match m.sum_log_secrecy() {
                Ok(v) => {
                    let _ = writeln!(out, "objective {}", fmt_float(v));
                }
                Err(e) => {
                    let _ = writeln!(out, "objective undefined ({e})");
                }
            }
        }
        Err(e) => {
            let _ = writeln!(out, "metrics error: {e}");
        }
    }
    let _ = writeln!(out, "total_power_mw {}", fmt_float(sol.total_power()));
}

fn audit_section(out: &mut String, beams: &BeamSolution, ch: &ChannelSet, cfg: &SystemConfig) {
    match ConstraintAudit::evaluate(&beams.to_covariance(), ch, cfg) {
        Ok(a) => {
            let _ = writeln!(out, "eh_margin_mw {}", join(&a.eh_margin));
            let _ = writeln!(out, "mu_margin_mw {}", join(&a.mu_margin));
            let _ = writeln!(out, "power_margin_mw {}", fmt_float(a.power_margin));
            let _ = writeln!(out, "min_eig_ratio {}", join(&a.min_eig_ratio));
            let verdict = if a.passes(AUDIT_TOL, AUDIT_TOL) { "pass" } else { "FAIL" };
            let _ = writeln!(out, "audit {verdict}");
        }
        Err(e) => {
            let _ = writeln!(out, "audit error: {e}");
        }
    }
}

/// Trial 0 under `seed`, end to end, as a line-oriented text report. Lines
/// starting with [`TIMING_PREFIX`] hold wall-clock times; every other line
/// is a deterministic function of `cfg`, `seed` and `settings`.
pub fn run_single(cfg: &SystemConfig, seed: u64, settings: &Settings) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[config]");
    out.push_str(&cfg.to_toml_string());
    let _ = writeln!(out, "\n[channels]");
    let _ = writeln!(out, "seed {seed} trial 0");
    let (ch, mut rng) = match draw(cfg, seed, 0) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(out, "status error: {e}");
            return out;
        }
    };
    for (name, vs) in [("h", &ch.ir), ("g", &ch.er), ("i", &ch.mu)] {
        for (idx, v) in vs.iter().enumerate() {
            let _ = writeln!(out, "{name}[{idx}] {}", vector(v));
        }
    }

    let opts = settings.sca_options(cfg);
    let start = Instant::now();
    let sca = sca_solve(&ch, cfg, &opts);
    let sca_time = start.elapsed().as_secs_f64();
    let _ = writeln!(out, "\n[initialization]");
    let sca = match sca {
        Ok(r) => r,
        Err(e) => {
            let status = match &e {
                ScaError::InitInfeasible(s) => format!("init-infeasible ({s:?})"),
                other => format!("error ({other})"),
            };
            let _ = writeln!(out, "status {status}");
            let _ = writeln!(out, "{TIMING_PREFIX}sca_s {sca_time:.3}");
            zf_section(&mut out, &ch, cfg, settings);
            return out;
        }
    };
    let _ = writeln!(out, "status ok");
    covariance_section(&mut out, &sca.init, &ch, cfg);

    let _ = writeln!(out, "\n[iterations]");
    let _ = writeln!(out, "kappa objective status solver_iterations reduced_accuracy margin_b margin_c activity_gap");
    for r in &sca.records {
        let _ = writeln!(
            out,
            "{} {} {:?} {} {} {} {} {}",
            r.kappa,
            fmt_float(r.objective),
            r.status,
            r.solver_iterations,
            r.reduced_accuracy,
            fmt_float(r.exact_margin_b),
            fmt_float(r.exact_margin_c),
            fmt_float(r.activity_gap)
        );
    }
    let _ = writeln!(out, "converged {}", sca.converged);
    if let Some(w) = &sca.warning {
        let _ = writeln!(out, "warning {w}");
    }
    covariance_section(&mut out, &sca.solution, &ch, cfg);
    let _ = writeln!(out, "{TIMING_PREFIX}sca_s {sca_time:.3}");

    let _ = writeln!(out, "\n[rank profiles]");
    let named = sca
        .solution
        .info
        .iter()
        .enumerate()
        .map(|(j, w)| (format!("W[{j}]"), w))
        .chain(std::iter::once(("Q".to_string(), &sca.solution.energy)));
    for (name, m) in named {
        match rank_profile(m, settings.recovery.rank_tol) {
            Ok(p) => {
                let _ = writeln!(
                    out,
                    "{name} rank {} dominance {} eigenvalues_mw {}",
                    p.numeric_rank,
                    fmt_float(p.dominance),
                    join(&p.eigenvalues)
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{name} error: {e}");
            }
        }
    }

    let _ = writeln!(out, "\n[recovery]");
    let start = Instant::now();
    let recovered = recover_beams(&sca.solution, &ch, cfg, &settings.recovery, &mut rng);
    let recovery_time = start.elapsed().as_secs_f64();
    match recovered {
        Ok(r) => {
            let _ = writeln!(out, "method {:?}", r.method);
            let _ = writeln!(out, "feasible_candidates {}", r.feasible_candidates);
            let _ = writeln!(out, "energy_rank {}", r.energy_rank);
            let _ = writeln!(out, "objective {}", fmt_float(r.objective));
            let _ = writeln!(out, "sdr_objective {}", fmt_float(r.sdr_objective));
            let _ = writeln!(out, "gap {}", fmt_float(r.gap()));
            for (j, w) in r.beams.info.iter().enumerate() {
                let _ = writeln!(out, "w[{j}] {}", vector(w));
            }
            for (i, q) in r.beams.energy.iter().enumerate() {
                let _ = writeln!(out, "q[{i}] {}", vector(q));
            }
            let _ = writeln!(out, "{TIMING_PREFIX}recovery_s {recovery_time:.3}");
            let _ = writeln!(out, "\n[audit]");
            audit_section(&mut out, &r.beams, &ch, cfg);
        }
        Err(e) => {
            let _ = writeln!(out, "status recovery-failed ({e})");
            let _ = writeln!(out, "{TIMING_PREFIX}recovery_s {recovery_time:.3}");
        }
    }
    zf_section(&mut out, &ch, cfg, settings);
    out
}

fn zf_section(out: &mut String, ch: &ChannelSet, cfg: &SystemConfig, settings: &Settings) {
    let _ = writeln!(out, "\n[zero forcing]");
    let start = Instant::now();
    let zf = zf_solve(ch, cfg, &settings.zf_solver);
    let elapsed = start.elapsed().as_secs_f64();
    match zf {
        Ok(z) => {
            let _ = writeln!(out, "status ok");
            let _ = writeln!(out, "powers_mw {}", join(&z.powers));
            let _ = writeln!(out, "degenerate {:?}", z.degenerate);
            let _ = writeln!(out, "objective {}", fmt_opt(z.objective));
            audit_section(out, &z.beams, ch, cfg);
        }
        Err(e) => {
            let _ = writeln!(out, "status infeasible ({e})");
        }
    }
    let _ = writeln!(out, "{TIMING_PREFIX}zf_s {elapsed:.3}");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Homogeneous;

    fn toy() -> SystemConfig {
        // validation is bypassed on purpose: a cheap three-antenna scenario
        let mut p = Homogeneous::reference();
        p.antennas = 3;
        p.ir_users = 1;
        p.er_users = 1;
        p.macro_users = 1;
        p.eh_threshold_mw = 0.1;
        p.build()
    }

    #[test]
    fn trial_streams_are_independent_and_reproducible() {
        use rand::Rng;
        let a: u64 = trial_rng(5, 0).random();
        let b: u64 = trial_rng(5, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(5, 0).random::<u64>());
        assert_ne!(a, trial_rng(6, 0).random::<u64>());
    }

    #[test]
    fn default_grids() {
        let v = default_varpi_mw();
        assert_eq!(v.len(), 10);
        assert_eq!((v[0], v[6], v[9]), (0.25, 1.75, 2.5));
    }

    #[test]
    fn zero_trials_give_header_only() {
        let recs = run_convergence(&toy(), &[30.0], 0, 1, &Settings::default());
        assert!(recs.is_empty());
        let mut buf = Vec::new();
        write_convergence_csv(&recs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "pmax_dbm,trial,iteration,objective\n");
    }

    #[test]
    fn convergence_rows_follow_the_trace() {
        let recs = run_convergence(&toy(), &[30.0], 2, 3, &Settings::default());
        assert_eq!(recs.len(), 2);
        let mut buf = Vec::new();
        write_convergence_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text.lines().count() - 1;
        assert_eq!(rows, recs.iter().map(|r| r.objective_trace.len()).sum::<usize>());
        for r in recs.iter().filter(|r| r.feasible) {
            assert!(r.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-6));
            assert!(r.objective.unwrap() <= r.sdr_objective.unwrap() + 1e-6);
        }
    }

    #[test]
    fn sweep_pairs_schemes_on_shared_channels() {
        let recs = run_threshold_sweep(&toy(), &[0.05, 1e3], 2, 9, &Settings::default());
        assert_eq!(recs.len(), 8);
        assert_eq!(recs[0].scheme, Scheme::Proposed);
        assert_eq!(recs[1].scheme, Scheme::Zf);
        assert_eq!((recs[0].trial, recs[1].trial), (0, 0));
        // a 1 W harvesting demand cannot be met from a 1 W budget
        assert!(recs[4..].iter().all(|r| !r.feasible));
        let summary = summarize_sweep(&recs);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[1].proposed.feasible + summary[1].zf.feasible, 0);
        assert_eq!(summary[1].proposed.mean, None);
        assert!(summary[0].paired <= summary[0].proposed.feasible.min(summary[0].zf.feasible));
        let mut buf = Vec::new();
        write_sweep_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.lines().nth(8).unwrap().contains(",zf,false,NaN,NaN,NaN"));
    }

    #[test]
    fn strip_timing_drops_only_timing_lines() {
        let report = "a 1\ntime sca_s 0.5\nb 2\n";
        assert_eq!(strip_timing(report), "a 1\nb 2\n");
    }

    #[test]
    fn float_format_keeps_fifteen_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333333e-1");
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }
}
