//! Counter-based random streams. Every (seed, lane, block) triple owns an
//! independent ChaCha stream, so a block's draws never depend on which
//! worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Data symbols, then the channel realization, of each block.
pub const LANE_DATA: u64 = 0;
/// SLM candidate sequences.
pub const LANE_SLM: u64 = 1;
/// Per-path phases of the doubly dispersive channel.
pub const LANE_LTV: u64 = 2;
/// Noise at SNR point `i` uses lane `LANE_NOISE + i`.
pub const LANE_NOISE: u64 = 16;

pub fn lane_stream(master_seed: u64, lane: u64, block_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&lane.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(block_id);
    rng
}

pub fn seed_stream(master_seed: u64, block_id: u64) -> ChaCha8Rng {
    lane_stream(master_seed, LANE_DATA, block_id)
}
