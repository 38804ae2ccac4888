//! Closed-form link metrics: SINRs, secrecy rates, harvested power, macro-user
//! interference and the proportional-fairness objective.
//!
//! Everything is evaluated on covariance matrices. Beam-level solutions are
//! lifted with `W_j = w_j w_j^H`, `Q = sum_i q_i q_i^H` first, so both views
//! share one code path.

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::error::MetricError;
use crate::linalg::{hermitian_eigen, outer, quad_form, real_trace, CMat, CVec};

/// Rate-domain auxiliary variables of the relaxed problem, all in log2(mW).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuxVars {
    /// Secrecy-rate lower bounds (bits).
    pub r: Vec<f64>,
    /// `2^a_j` <= total received power at IR user `j`.
    pub a: Vec<f64>,
    /// `2^b_j` >= interference-plus-noise at IR user `j`.
    pub b: Vec<f64>,
    /// `2^c_k` >= total received power at ER user `k`.
    pub c: Vec<f64>,
    /// `d[k][j]`: `2^d` <= power at ER user `k` excluding beam `j`.
    pub d: Vec<Vec<f64>>,
}

/// Covariance-level transmit design.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSolution {
    /// Information covariance per IR user (mW).
    pub info: Vec<CMat>,
    /// Aggregate energy covariance (mW).
    pub energy: CMat,
    pub aux: Option<AuxVars>,
}

impl CovarianceSolution {
    pub fn zeros(antennas: usize, ir_users: usize) -> Self {
        Self {
            info: vec![CMat::zeros(antennas, antennas); ir_users],
            energy: CMat::zeros(antennas, antennas),
            aux: None,
        }
    }

    pub fn antennas(&self) -> usize {
        self.energy.nrows()
    }

    pub fn total_power(&self) -> f64 {
        self.info.iter().map(real_trace).sum::<f64>() + real_trace(&self.energy)
    }
}

/// Beam-level transmit design: information beams `w_j` and energy beams `q_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSolution {
    pub info: Vec<CVec>,
    pub energy: Vec<CVec>,
}

impl BeamSolution {
    /// Number of energy beams.
    pub fn gamma(&self) -> usize {
        self.energy.len()
    }

    pub fn total_power(&self) -> f64 {
        self.info
            .iter()
            .chain(&self.energy)
            .map(|v| v.norm_squared())
            .sum()
    }

    pub fn to_covariance(&self) -> CovarianceSolution {
        let t = self.info[0].len();
        let mut energy = CMat::zeros(t, t);
        for q in &self.energy {
            energy += outer(q);
        }
        CovarianceSolution {
            info: self.info.iter().map(outer).collect(),
            energy,
            aux: None,
        }
    }
}

/// Received-power tables for one solution on one channel set.
///
/// `ir_rx[j][l] = tr(H_j W_l)`, `ir_energy[j] = tr(H_j Q)`; same layout for
/// ER users and macro users.
#[derive(Debug, Clone)]
pub struct Metrics<'a> {
    cfg: &'a SystemConfig,
    ir_rx: Vec<Vec<f64>>,
    ir_energy: Vec<f64>,
    er_rx: Vec<Vec<f64>>,
    er_energy: Vec<f64>,
    mu_rx: Vec<Vec<f64>>,
    mu_energy: Vec<f64>,
}

fn check_index(what: &'static str, index: usize, count: usize) -> Result<(), MetricError> {
    if index < count {
        Ok(())
    } else {
        Err(MetricError::IndexOutOfRange { what, index, count })
    }
}

impl<'a> Metrics<'a> {
    pub fn new(
        sol: &CovarianceSolution,
        ch: &ChannelSet,
        cfg: &'a SystemConfig,
    ) -> Result<Self, MetricError> {
        if !ch.matches(cfg) {
            return Err(MetricError::Shape("channel counts differ from config".into()));
        }
        if sol.info.len() != cfg.ir_users || sol.antennas() != cfg.antennas {
            return Err(MetricError::Shape(format!(
                "expected {} {}x{} information covariances, got {} of size {}",
                cfg.ir_users,
                cfg.antennas,
                cfg.antennas,
                sol.info.len(),
                sol.antennas()
            )));
        }
        let table = |vs: &[CVec]| -> (Vec<Vec<f64>>, Vec<f64>) {
            let rx = vs
                .iter()
                .map(|v| sol.info.iter().map(|w| quad_form(w, v)).collect())
                .collect();
            let energy = vs.iter().map(|v| quad_form(&sol.energy, v)).collect();
            (rx, energy)
        };
        let (ir_rx, ir_energy) = table(&ch.ir);
        let (er_rx, er_energy) = table(&ch.er);
        let (mu_rx, mu_energy) = table(&ch.mu);
        Ok(Self {
            cfg,
            ir_rx,
            ir_energy,
            er_rx,
            er_energy,
            mu_rx,
            mu_energy,
        })
    }

    /// Interference-plus-noise at IR user `j`: everything but its own beam.
    pub fn ir_interference(&self, j: usize) -> Result<f64, MetricError> {
        check_index("IR user", j, self.cfg.ir_users)?;
        let cross: f64 = (0..self.cfg.ir_users)
            .filter(|&l| l != j)
            .map(|l| self.ir_rx[j][l])
            .sum();
        Ok(cross + self.ir_energy[j] + self.cfg.mbs_interference_ir_mw[j] + self.cfg.noise_ir_mw[j])
    }

    /// Total received power plus noise at IR user `j`.
    pub fn ir_total(&self, j: usize) -> Result<f64, MetricError> {
        Ok(self.ir_interference(j)? + self.ir_rx[j][j])
    }

    /// Power at ER user `k` excluding beam `j`, plus noise.
    pub fn er_interference(&self, k: usize, j: usize) -> Result<f64, MetricError> {
        check_index("ER user", k, self.cfg.er_users)?;
        check_index("IR user", j, self.cfg.ir_users)?;
        let cross: f64 = (0..self.cfg.ir_users)
            .filter(|&l| l != j)
            .map(|l| self.er_rx[k][l])
            .sum();
        Ok(cross + self.er_energy[k] + self.cfg.mbs_interference_er_mw[k] + self.cfg.noise_er_mw[k])
    }

    /// Total received power plus noise at ER user `k`.
    pub fn er_total(&self, k: usize) -> Result<f64, MetricError> {
        check_index("ER user", k, self.cfg.er_users)?;
        let all: f64 = self.er_rx[k].iter().sum();
        Ok(all + self.er_energy[k] + self.cfg.mbs_interference_er_mw[k] + self.cfg.noise_er_mw[k])
    }

    /// `tr(G_k W_j)`: information leakage of beam `j` at ER user `k`.
    pub fn leakage(&self, k: usize, j: usize) -> Result<f64, MetricError> {
        check_index("ER user", k, self.cfg.er_users)?;
        check_index("IR user", j, self.cfg.ir_users)?;
        Ok(self.er_rx[k][j])
    }

    /// `tr(H_j W_l)`.
    pub fn ir_received(&self, j: usize, l: usize) -> Result<f64, MetricError> {
        check_index("IR user", j, self.cfg.ir_users)?;
        check_index("IR user", l, self.cfg.ir_users)?;
        Ok(self.ir_rx[j][l])
    }

    pub fn sinr_ir(&self, j: usize) -> Result<f64, MetricError> {
        let den = self.ir_interference(j)?;
        Ok(self.ir_rx[j][j].max(0.0) / den)
    }

    pub fn sinr_er(&self, k: usize, j: usize) -> Result<f64, MetricError> {
        let den = self.er_interference(k, j)?;
        Ok(self.er_rx[k][j].max(0.0) / den)
    }

    /// Secrecy rate of IR user `j` in bits; negative when an eavesdropper
    /// out-decodes the legitimate receiver.
    pub fn secrecy_rate(&self, j: usize) -> Result<f64, MetricError> {
        let legit = (1.0 + self.sinr_ir(j)?).log2();
        let mut worst = 0.0f64;
        for k in 0..self.cfg.er_users {
            worst = worst.max((1.0 + self.sinr_er(k, j)?).log2());
        }
        Ok(legit - worst)
    }

    pub fn secrecy_rates(&self) -> Vec<f64> {
        (0..self.cfg.ir_users)
            .map(|j| self.secrecy_rate(j).expect("index in range"))
            .collect()
    }

    pub fn harvested_power(&self, k: usize) -> Result<f64, MetricError> {
        check_index("ER user", k, self.cfg.er_users)?;
        let beams: f64 = self.er_rx[k].iter().sum();
        Ok(self.cfg.efficiency[k] * (beams + self.er_energy[k] + self.cfg.mbs_interference_er_mw[k]))
    }

    pub fn mu_interference(&self, n: usize) -> Result<f64, MetricError> {
        check_index("macro user", n, self.cfg.macro_users)?;
        Ok(self.mu_rx[n].iter().sum::<f64>() + self.mu_energy[n])
    }

    /// Sum of natural logs of the secrecy rates.
    pub fn sum_log_secrecy(&self) -> Result<f64, MetricError> {
        sum_log(&self.secrecy_rates())
    }
}

/// `sum_j ln R_j`; errors on the first nonpositive rate.
pub fn sum_log(rates: &[f64]) -> Result<f64, MetricError> {
    let mut acc = 0.0;
    for (user, &rate) in rates.iter().enumerate() {
        if !(rate > 0.0) {
            return Err(MetricError::NonPositiveRate { user, rate });
        }
        acc += rate.ln();
    }
    Ok(acc)
}

/// Convenience wrapper around [`Metrics::sum_log_secrecy`].
pub fn sum_log_secrecy(
    sol: &CovarianceSolution,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64, MetricError> {
    Metrics::new(sol, ch, cfg)?.sum_log_secrecy()
}

/// Constraint margins of a solution; positive margins mean satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintAudit {
    /// `E_k - varpi_k` (mW).
    pub eh_margin: Vec<f64>,
    /// `eta_n - I_n` (mW).
    pub mu_margin: Vec<f64>,
    /// `P_max - total power` (mW).
    pub power_margin: f64,
    /// Smallest eigenvalue of each covariance divided by its trace
    /// (information covariances first, energy covariance last).
    pub min_eig_ratio: Vec<f64>,
}

impl ConstraintAudit {
    pub fn evaluate(
        sol: &CovarianceSolution,
        ch: &ChannelSet,
        cfg: &SystemConfig,
    ) -> Result<Self, MetricError> {
        let m = Metrics::new(sol, ch, cfg)?;
        let eh_margin = (0..cfg.er_users)
            .map(|k| m.harvested_power(k).map(|e| e - cfg.eh_threshold_mw[k]))
            .collect::<Result<_, _>>()?;
        let mu_margin = (0..cfg.macro_users)
            .map(|n| m.mu_interference(n).map(|i| cfg.mu_threshold_mw[n] - i))
            .collect::<Result<_, _>>()?;
        let power_margin = cfg.p_max_mw - sol.total_power();
        let min_eig_ratio = sol
            .info
            .iter()
            .chain(std::iter::once(&sol.energy))
            .map(|x| {
                let tr = real_trace(x);
                let min = *hermitian_eigen(x).values.last().unwrap_or(&0.0);
                if tr > 0.0 {
                    min / tr
                } else if min >= 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Ok(Self {
            eh_margin,
            mu_margin,
            power_margin,
            min_eig_ratio,
        })
    }

    /// All constraints hold with absolute slack `power_tol` (mW) and relative
    /// PSD slack `psd_tol`.
    pub fn passes(&self, power_tol: f64, psd_tol: f64) -> bool {
        self.eh_margin.iter().all(|&m| m >= -power_tol)
            && self.mu_margin.iter().all(|&m| m >= -power_tol)
            && self.power_margin >= -power_tol
            && self.min_eig_ratio.iter().all(|&r| r >= -psd_tol)
    }

    pub fn worst_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for &m in self.eh_margin.iter().chain(&self.mu_margin) {
            worst = worst.max(-m);
        }
        worst.max(-self.power_margin)
    }
}
