//! Rayleigh channel realizations for one femtocell drop.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::SystemConfig;
use crate::error::ConfigError;
use crate::linalg::{outer, CMat, CVec};

/// One realization of every FBS channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// FBS to IR user `j`.
    pub ir: Vec<CVec>,
    /// FBS to ER user `k`.
    pub er: Vec<CVec>,
    /// FBS to macrocell user `n`.
    pub mu: Vec<CVec>,
}

impl ChannelSet {
    pub fn new(ir: Vec<CVec>, er: Vec<CVec>, mu: Vec<CVec>) -> Result<Self, ConfigError> {
        let set = Self { ir, er, mu };
        let dim = set
            .ir
            .first()
            .map(|v| v.len())
            .ok_or_else(|| ConfigError::InvalidArgument("at least one IR channel required".into()))?;
        for v in set.ir.iter().chain(&set.er).chain(&set.mu) {
            if v.len() != dim {
                return Err(ConfigError::InvalidArgument(format!(
                    "channel vectors must share one length ({} vs {dim})",
                    v.len()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(ConfigError::InvalidArgument("channel entry is not finite".into()));
            }
        }
        Ok(set)
    }

    /// Builds a set from real-valued vectors; convenient for hand-made instances.
    pub fn from_real(ir: &[&[f64]], er: &[&[f64]], mu: &[&[f64]]) -> Result<Self, ConfigError> {
        let lift = |rows: &[&[f64]]| -> Vec<CVec> {
            rows.iter()
                .map(|r| CVec::from_iterator(r.len(), r.iter().map(|&x| Complex64::new(x, 0.0))))
                .collect()
        };
        Self::new(lift(ir), lift(er), lift(mu))
    }

    pub fn antennas(&self) -> usize {
        self.ir[0].len()
    }

    /// `H_j = h_j h_j^H`.
    pub fn gram_ir(&self, j: usize) -> CMat {
        outer(&self.ir[j])
    }

    /// `G_k = g_k g_k^H`.
    pub fn gram_er(&self, k: usize) -> CMat {
        outer(&self.er[k])
    }

    /// `I_n = i_n i_n^H`.
    pub fn gram_mu(&self, n: usize) -> CMat {
        outer(&self.mu[n])
    }

    /// True when the vector counts match the config.
    pub fn matches(&self, cfg: &SystemConfig) -> bool {
        self.ir.len() == cfg.ir_users
            && self.er.len() == cfg.er_users
            && self.mu.len() == cfg.macro_users
            && self.antennas() == cfg.antennas
    }
}

fn draw_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVec {
    // CN(0, v): independent real and imaginary parts with variance v/2 each
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite variance");
    CVec::from_iterator(
        len,
        (0..len).map(|_| Complex64::new(normal.sample(rng), normal.sample(rng))),
    )
}

/// Draws every channel i.i.d. from `CN(0, PL(d) I)` with the per-class distance.
pub fn generate_channels<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelSet, ConfigError> {
    cfg.check_dimensions()?;
    let t = cfg.antennas;
    let var_ir = cfg.path_loss(cfg.distance_ir_m)?;
    let var_er = cfg.path_loss(cfg.distance_er_m)?;
    let var_mu = cfg.path_loss(cfg.distance_mu_m)?;
    let ir = (0..cfg.ir_users).map(|_| draw_vector(rng, t, var_ir)).collect();
    let er = (0..cfg.er_users).map(|_| draw_vector(rng, t, var_er)).collect();
    let mu = (0..cfg.macro_users).map(|_| draw_vector(rng, t, var_mu)).collect();
    ChannelSet::new(ir, er, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, is_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = SystemConfig::reference();
        let a = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        let c = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_follow_config() {
        let cfg = SystemConfig::reference();
        let ch = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((ch.ir.len(), ch.er.len(), ch.mu.len()), (2, 2, 2));
        assert!(ch.ir.iter().chain(&ch.er).chain(&ch.mu).all(|v| v.len() == 6));
        assert!(ch.matches(&cfg));
    }

    #[test]
    fn gram_matrices_are_rank_one_psd() {
        let cfg = SystemConfig::reference();
        let ch = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for g in [ch.gram_ir(0), ch.gram_er(1), ch.gram_mu(0)] {
            assert!(is_hermitian(&g, 1e-14));
            let eig = hermitian_eigen(&g);
            assert!(eig.values[0] > 0.0);
            assert!(eig.values[1..].iter().all(|&l| l.abs() <= 1e-12 * eig.values[0]));
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(ChannelSet::from_real(&[&[1.0, 0.0]], &[&[1.0]], &[]).is_err());
    }
}
