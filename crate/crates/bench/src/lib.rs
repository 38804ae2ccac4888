//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use secbf_core::{generate_channels, ChannelSet, SystemConfig};

/// Reference scenario with the channels of `seed`.
pub fn reference_instance(seed: u64) -> (ChannelSet, SystemConfig) {
    let cfg = SystemConfig::reference();
    let ch = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).expect("reference config is consistent");
    (ch, cfg)
}
