//! Keyed random streams.
//!
//! Every random decision in a replication draws from a ChaCha stream whose key
//! is derived from `(master seed, replication, phase tag)`. Streams for
//! different phases never share state, so enabling or disabling one strategy
//! leaves the draws of every other phase untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Phase tags used by the harness.
pub mod phase {
    pub const POPULATION: &str = "population";
    pub const TIEBREAK: &str = "tiebreak";
    pub const SCHEDULE: &str = "schedule";
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derive an independent stream for `(master, replication, tag)`.
pub fn stream(master: u64, replication: u64, tag: &str) -> Stream {
    let mut state = master;
    // absorb each key part through the mixer so that nearby keys decorrelate
    state ^= splitmix64(&mut { replication ^ 0xA076_1D64_78BD_642F });
    state ^= splitmix64(&mut { fnv1a(tag.as_bytes()) });
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Tag for the schedule stream of one strategy in one deliberation round.
pub fn schedule_tag(strategy: &str, round: usize) -> String {
    format!("{}:{strategy}:{round}", phase::SCHEDULE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3, "x"), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3, "x"), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn keys_are_isolated() {
        let base = stream(7, 3, "x").next_u64();
        assert_ne!(base, stream(8, 3, "x").next_u64());
        assert_ne!(base, stream(7, 4, "x").next_u64());
        assert_ne!(base, stream(7, 3, "y").next_u64());
        assert_ne!(stream(0, 1, "t").next_u64(), stream(1, 0, "t").next_u64());
    }
}
