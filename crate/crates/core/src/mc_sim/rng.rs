//! Counter-style stream derivation: every random draw is addressed by
//! `(seed, domain, trial, bin, section, kind)`, so results do not depend on
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which part of the simulation a stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Calibration = 1,
    Ensemble = 2,
}

/// What a stream is used for within a section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum DrawKind {
    Unitary = 1,
    SectionGain = 2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamId {
    pub seed: u64,
    pub domain: Domain,
    pub trial: u64,
    pub bin: u64,
}

impl StreamId {
    pub fn rng(&self, section: u64, kind: DrawKind) -> ChaCha8Rng {
        let words = [self.seed, self.domain as u64, self.trial, self.bin, section, kind as u64];
        let mut key = [0u8; 32];
        let mut state = 0x243f_6a88_85a3_08d3u64;
        for (chunk, lane) in key.chunks_exact_mut(8).zip(0u64..) {
            for &w in &words {
                state = splitmix64(state ^ w.wrapping_add(lane.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
            }
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
