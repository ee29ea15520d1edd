//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `(master_seed, domain)` and selected by `index` through the cipher's
//! stream id, so trial `i` sees the same numbers whatever thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes get independent keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Sample = 0x5a4d_504c_4500_0001,
    Frame = 0x4652_414d_4500_0002,
    Validation = 0x5641_4c49_4400_0003,
    Auxiliary = 0x4155_5849_4c00_0004,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(master_seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ (domain as u64);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, e.g. one per sweep size.
pub fn derive_seed(master_seed: u64, salt: u64) -> u64 {
    let mut state = master_seed ^ salt.rotate_left(17);
    splitmix64(&mut state)
}
