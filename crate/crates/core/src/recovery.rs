//! Beam recovery from covariance solutions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::error::RecoveryError;
use crate::linalg::{hermitian_eigen, outer, psd_sqrt, quad_form, CMat, CVec};
use crate::metrics::{sum_log_secrecy, BeamSolution, CovarianceSolution, Metrics};

/// Eigenvalues below `-PSD_TOL * lambda_1` make a matrix indefinite; smaller
/// negative eigenvalues are solver round-off and are clipped to zero.
pub const PSD_TOL: f64 = 1e-6;
/// Dominance above which the eigenvector beam joins the candidate pool.
pub const INJECT_DOMINANCE: f64 = 1.0 - 1e-6;
/// Absolute slack (mW) on the harvesting audit of randomized candidates.
pub const EH_AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    /// Randomization candidates, including the injected eigenvector beam.
    pub samples: usize,
    pub rank_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { samples: 100, rank_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    /// Descending (mW).
    pub eigenvalues: Vec<f64>,
    /// `lambda_1 / sum(lambda)`; 1 for the zero matrix.
    pub dominance: f64,
    pub numeric_rank: usize,
}

pub fn rank_profile(w: &CMat, rank_tol: f64) -> Result<RankProfile, RecoveryError> {
    let raw = hermitian_eigen(w).values;
    let top = raw.first().copied().unwrap_or(0.0).max(0.0);
    let min = raw.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL * top || (top == 0.0 && min < 0.0) {
        return Err(RecoveryError::Indefinite { min });
    }
    let eigenvalues: Vec<f64> = raw.into_iter().map(|l| l.max(0.0)).collect();
    if top == 0.0 {
        return Ok(RankProfile { eigenvalues, dominance: 1.0, numeric_rank: 0 });
    }
    let total: f64 = eigenvalues.iter().sum();
    let numeric_rank = eigenvalues.iter().filter(|&&l| l > rank_tol * top).count();
    Ok(RankProfile { dominance: top / total, eigenvalues, numeric_rank })
}

/// `sqrt(lambda_1) u_1` for a numerically rank-one PSD matrix.
pub fn extract_rank_one(w: &CMat, rank_tol: f64) -> Result<CVec, RecoveryError> {
    let profile = rank_profile(w, rank_tol)?;
    if profile.numeric_rank > 1 {
        return Err(RecoveryError::NotRankOne { rank: profile.numeric_rank });
    }
    let eig = hermitian_eigen(w);
    let lambda = eig.values[0].max(0.0);
    Ok(eig.vectors.column(0).into_owned().scale(lambda.sqrt()))
}

/// Eigen-factorization `Q = sum_i q_i q_i^H` over the numerically nonzero modes.
pub fn energy_beams(q: &CMat, rank_tol: f64) -> Result<Vec<CVec>, RecoveryError> {
    let profile = rank_profile(q, rank_tol)?;
    let eig = hermitian_eigen(q);
    Ok((0..profile.numeric_rank)
        .map(|i| eig.vectors.column(i).into_owned().scale(eig.values[i].max(0.0).sqrt()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryMethod {
    Eigenvector,
    Randomized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub beams: BeamSolution,
    /// Sum-log secrecy rate of `beams`.
    pub objective: f64,
    /// Sum-log secrecy rate of the covariance solution.
    pub sdr_objective: f64,
    pub method: RecoveryMethod,
    /// Candidates that passed the audit (1 for the eigenvector path).
    pub feasible_candidates: usize,
    /// One profile per information covariance.
    pub profiles: Vec<RankProfile>,
    /// Number of energy beams at the rank tolerance.
    pub energy_rank: usize,
}

impl Recovered {
    pub fn gap(&self) -> f64 {
        self.sdr_objective - self.objective
    }
}

/// Scales the information beams by the largest common power factor `<= 1`
/// that meets the macro-user and power limits with the energy beams fixed,
/// then audits harvesting. Returns the candidate and its objective.
fn admit(
    info: Vec<CVec>,
    energy: &[CVec],
    energy_cov: &CMat,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Option<(BeamSolution, f64)> {
    let mut alpha = 1.0f64;
    for (n, i) in ch.mu.iter().enumerate() {
        let from_info: f64 = info.iter().map(|w| w.dotc(i).norm_sqr()).sum();
        let room = cfg.mu_threshold_mw[n] - quad_form(energy_cov, i);
        if from_info > 0.0 {
            alpha = alpha.min(room / from_info);
        }
    }
    let info_power: f64 = info.iter().map(|w| w.norm_squared()).sum();
    let room = cfg.p_max_mw - energy.iter().map(|q| q.norm_squared()).sum::<f64>();
    if info_power > 0.0 {
        alpha = alpha.min(room / info_power);
    }
    if !(alpha > 0.0) {
        return None;
    }
    let scale = alpha.sqrt();
    let beams = BeamSolution { info: info.into_iter().map(|w| w.scale(scale)).collect(), energy: energy.to_vec() };
    let cov = beams.to_covariance();
    let m = Metrics::new(&cov, ch, cfg).ok()?;
    for k in 0..cfg.er_users {
        if m.harvested_power(k).ok()? < cfg.eh_threshold_mw[k] - EH_AUDIT_TOL {
            return None;
        }
    }
    let objective = m.sum_log_secrecy().ok()?;
    Some((beams, objective))
}

fn standard_complex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex64::new(re * s, im * s)
    })
}

/// Principal eigenvector beams, with every discarded eigenmode moved into
/// the energy covariance so the total transmit covariance is unchanged.
fn eigenvector_candidate(sol: &CovarianceSolution) -> (Vec<CVec>, CMat) {
    let mut energy = sol.energy.clone();
    let info = sol
        .info
        .iter()
        .map(|w| {
            let eig = hermitian_eigen(w);
            let beam = eig.vectors.column(0).into_owned().scale(eig.values[0].max(0.0).sqrt());
            energy += w - outer(&beam);
            beam
        })
        .collect();
    (info, (&energy + energy.adjoint()).scale(0.5))
}

/// Every positive eigenmode, so the beams reproduce `q` to round-off.
fn all_modes(q: &CMat) -> Result<Vec<CVec>, RecoveryError> {
    energy_beams(q, 0.0)
}

fn profiles(sol: &CovarianceSolution, rank_tol: f64) -> Result<Vec<RankProfile>, RecoveryError> {
    sol.info.iter().map(|w| rank_profile(w, rank_tol)).collect()
}

/// Best of `opts.samples` Gaussian candidates `w_j = W_j^{1/2} v_j`.
///
/// The eigenvector beams take the first slot when every information
/// covariance has dominance at least [`INJECT_DOMINANCE`].
pub fn gaussian_randomization<R: Rng + ?Sized>(
    sol: &CovarianceSolution,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    opts: &RecoveryOptions,
    rng: &mut R,
) -> Result<Recovered, RecoveryError> {
    let profiles = profiles(sol, opts.rank_tol)?;
    let sdr_objective = sum_log_secrecy(sol, ch, cfg)?;
    let energy_rank = rank_profile(&sol.energy, opts.rank_tol)?.numeric_rank;
    let energy = all_modes(&sol.energy)?;
    let roots: Vec<CMat> = sol.info.iter().map(psd_sqrt).collect();
    let t = sol.antennas();

    let mut best: Option<(BeamSolution, f64)> = None;
    let mut feasible = 0;
    let inject = profiles.iter().all(|p| p.dominance >= INJECT_DOMINANCE);
    for sample in 0..opts.samples {
        let admitted = if inject && sample == 0 {
            let (info, q) = eigenvector_candidate(sol);
            admit(info, &all_modes(&q)?, &q, ch, cfg)
        } else {
            let info = roots.iter().map(|r| r * standard_complex(t, rng)).collect();
            admit(info, &energy, &sol.energy, ch, cfg)
        };
        if let Some((beams, objective)) = admitted {
            feasible += 1;
            if best.as_ref().map_or(true, |(_, b)| objective > *b) {
                best = Some((beams, objective));
            }
        }
    }
    let (beams, objective) = best.ok_or(RecoveryError::NoFeasibleCandidate { samples: opts.samples })?;
    Ok(Recovered {
        beams,
        objective,
        sdr_objective,
        method: RecoveryMethod::Randomized,
        feasible_candidates: feasible,
        profiles,
        energy_rank,
    })
}

/// Eigenvector beams when every information covariance is numerically rank
/// one and passes the audit, Gaussian randomization otherwise.
pub fn recover_beams<R: Rng + ?Sized>(
    sol: &CovarianceSolution,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    opts: &RecoveryOptions,
    rng: &mut R,
) -> Result<Recovered, RecoveryError> {
    let profiles = profiles(sol, opts.rank_tol)?;
    if profiles.iter().all(|p| p.numeric_rank <= 1) {
        let (info, q) = eigenvector_candidate(sol);
        if let Some((beams, objective)) = admit(info, &all_modes(&q)?, &q, ch, cfg) {
            return Ok(Recovered {
                beams,
                objective,
                sdr_objective: sum_log_secrecy(sol, ch, cfg)?,
                method: RecoveryMethod::Eigenvector,
                feasible_candidates: 1,
                profiles,
                energy_rank: rank_profile(&sol.energy, opts.rank_tol)?.numeric_rank,
            });
        }
    }
    gaussian_randomization(sol, ch, cfg, opts, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(t: usize, i: usize) -> CVec {
        CVec::from_fn(t, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn scaled_projector_profile() {
        let u = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let p = rank_profile(&outer(&u).scale(5.0), 1e-6).unwrap();
        assert!((p.dominance - 1.0).abs() < 1e-12);
        assert_eq!(p.numeric_rank, 1);
        let p = rank_profile(&CMat::identity(2, 2), 1e-6).unwrap();
        assert!((p.dominance - 0.5).abs() < 1e-12);
        assert_eq!(p.numeric_rank, 2);
    }

    #[test]
    fn indefinite_rejected() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-0.1, 0.0)]));
        assert!(matches!(rank_profile(&m, 1e-6), Err(RecoveryError::Indefinite { .. })));
    }

    #[test]
    fn rank_one_extraction() {
        let w = extract_rank_one(&outer(&unit(3, 0)).scale(4.0), 1e-6).unwrap();
        assert!((w[0].norm() - 2.0).abs() < 1e-12);
        assert!(w[1].norm() < 1e-12 && w[2].norm() < 1e-12);

        let v = CVec::from_vec(vec![c(1.0, -0.5), c(0.2, 0.3), c(-0.7, 0.1)]);
        let w = extract_rank_one(&outer(&v), 1e-6).unwrap();
        let h = CVec::from_vec(vec![c(0.3, 0.3), c(-1.0, 0.0), c(0.5, 2.0)]);
        let want = quad_form(&outer(&v), &h);
        assert!((quad_form(&outer(&w), &h) - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn perturbed_rank_one_accepted() {
        let v = CVec::from_vec(vec![c(1.0, -0.5), c(0.2, 0.3), c(-0.7, 0.1)]);
        let lambda1 = v.norm_squared();
        let mut other = unit(3, 1) - v.scale(v[1].conj().re / lambda1);
        other -= v.scale(v.dotc(&other).re / lambda1);
        let other = other.normalize();
        let w = outer(&v) + outer(&other).scale(1e-9 * lambda1);
        let beam = extract_rank_one(&w, 1e-6).unwrap();
        assert!((outer(&beam) - &w).norm() <= 1e-5 * crate::linalg::real_trace(&w));
    }

    #[test]
    fn full_rank_input_needs_randomization() {
        assert!(matches!(
            extract_rank_one(&CMat::identity(2, 2), 1e-6),
            Err(RecoveryError::NotRankOne { rank: 2 })
        ));
    }

    #[test]
    fn energy_beam_factorization() {
        let q = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let beams = energy_beams(&q, 1e-6).unwrap();
        assert_eq!(beams.len(), 1);
        assert!((beams[0][0].norm() - 1.0).abs() < 1e-12);

        let beams = energy_beams(&CMat::identity(2, 2), 1e-6).unwrap();
        assert_eq!(beams.len(), 2);
        assert!(beams[0].dotc(&beams[1]).norm() < 1e-12);
        let mut sum = CMat::zeros(2, 2);
        for b in &beams {
            sum += outer(b);
        }
        assert!((sum - CMat::identity(2, 2)).norm() < 1e-12);
        assert!(energy_beams(&CMat::zeros(2, 2), 1e-6).unwrap().is_empty());
    }

    fn toy() -> (ChannelSet, SystemConfig) {
        let mut cfg = SystemConfig::reference();
        cfg.antennas = 2;
        cfg.ir_users = 1;
        cfg.er_users = 1;
        cfg.macro_users = 0;
        cfg.noise_ir_mw = vec![1.0];
        cfg.noise_er_mw = vec![1.0];
        cfg.efficiency = vec![0.5];
        cfg.eh_threshold_mw = vec![0.1];
        cfg.mu_threshold_mw = vec![];
        cfg.mbs_interference_ir_mw = vec![0.0];
        cfg.mbs_interference_er_mw = vec![0.0];
        cfg.p_max_mw = 10.0;
        let ch = ChannelSet::from_real(&[&[1.0, 0.2]], &[&[0.3, 1.0]], &[]).unwrap();
        (ch, cfg)
    }

    #[test]
    fn zero_samples_find_nothing() {
        let (ch, cfg) = toy();
        let h = &ch.ir[0];
        let sol = CovarianceSolution {
            info: vec![outer(h).scale(2.0)],
            energy: CMat::identity(2, 2),
            aux: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let opts = RecoveryOptions { samples: 0, ..Default::default() };
        assert!(matches!(
            gaussian_randomization(&sol, &ch, &cfg, &opts, &mut rng),
            Err(RecoveryError::NoFeasibleCandidate { samples: 0 })
        ));
    }

    #[test]
    fn rank_one_input_matches_eigenvector_objective() {
        let (ch, cfg) = toy();
        let h = &ch.ir[0];
        let sol = CovarianceSolution {
            info: vec![outer(h).scale(2.0)],
            energy: CMat::identity(2, 2),
            aux: None,
        };
        let evd = BeamSolution { info: vec![extract_rank_one(&sol.info[0], 1e-6).unwrap()], energy: energy_beams(&sol.energy, 1e-6).unwrap() };
        let evd_obj = sum_log_secrecy(&evd.to_covariance(), &ch, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let got = gaussian_randomization(&sol, &ch, &cfg, &RecoveryOptions::default(), &mut rng).unwrap();
        assert!(got.objective >= evd_obj - 1e-9);
    }

    #[test]
    fn rank_two_candidates_respect_budget() {
        let (ch, cfg) = toy();
        // full-rank information covariance, energy steered at the eavesdropper
        let sol = CovarianceSolution {
            info: vec![outer(&ch.ir[0]).scale(2.0) + CMat::identity(2, 2).scale(0.3)],
            energy: outer(&ch.er[0]).scale(2.0),
            aux: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let got = gaussian_randomization(&sol, &ch, &cfg, &RecoveryOptions::default(), &mut rng).unwrap();
        assert_eq!(got.method, RecoveryMethod::Randomized);
        assert!(got.beams.total_power() <= cfg.p_max_mw + 1e-9);
        assert!(got.feasible_candidates > 0);
    }
}
