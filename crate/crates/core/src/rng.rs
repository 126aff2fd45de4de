//! Deterministic seed derivation for reproducible Monte Carlo work.
//!
//! A [`SeedStream`] names a point in a seed tree: the master seed is the
//! root, and every child is addressed by an integer index or a string
//! label. Two runs that derive the same path get the same random stream,
//! no matter which thread or in what order the streams are consumed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates nearby integer inputs.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(state: u64, input: u64) -> u64 {
    splitmix64(splitmix64(state ^ input).wrapping_add(input))
}

/// A node in a deterministic seed-derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64) -> Self {
        SeedStream {
            state: splitmix64(master_seed),
        }
    }

    /// Derive the child stream at `index`. Children with distinct indices
    /// are decorrelated; the parent is unchanged.
    pub fn child(&self, index: u64) -> Self {
        SeedStream {
            state: mix(self.state, index),
        }
    }

    /// Derive a child stream addressed by a string label, e.g. an
    /// experiment name.
    pub fn label(&self, name: &str) -> Self {
        let mut state = self.state;
        for chunk in name.as_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            state = mix(state, u64::from_le_bytes(word));
        }
        SeedStream {
            state: mix(state, name.len() as u64),
        }
    }

    /// Instantiate the RNG for this node.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.state)
    }
}
