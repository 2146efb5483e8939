//! Seeded key streams.
//!
//! Each stream is an xoshiro256** generator whose state is filled by four
//! successive splitmix64 outputs, starting from `seed ^ tag`. The tags keep
//! the four streams independent even though three share the seed `k`.

use serde::{Deserialize, Serialize};

const TAG_LAYER1: u64 = u64::from_be_bytes(*b"etcK0prm");
const TAG_LAYER2: u64 = u64::from_be_bytes(*b"etcK1prm");
const TAG_DIHEDRAL: u64 = u64::from_be_bytes(*b"etcK2dih");
const TAG_NEGPOS: u64 = u64::from_be_bytes(*b"etcK3neg");

/// One splitmix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256** pseudo-random generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyStream {
    s: [u64; 4],
}

impl KeyStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-and-reject).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let mut m = self.next_u64() as u128 * bound as u128;
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * bound as u128;
            }
        }
        (m >> 64) as u64
    }

    /// Fair coin from the top bit.
    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// The seeds `k0` (shared layer) and `k` (changeable layer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeds {
    pub k0: u64,
    pub k: u64,
}

/// Key streams derived from [`Seeds`]. Cloning a `KeySet` and reading a
/// stream always starts from the beginning of that stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeySet {
    seeds: Seeds,
}

impl KeySet {
    pub fn seeds(&self) -> Seeds {
        self.seeds
    }

    pub fn k0(&self) -> u64 {
        self.seeds.k0
    }

    pub fn k(&self) -> u64 {
        self.seeds.k
    }

    /// Layer-1 permutation stream, K0.
    pub fn layer1(&self) -> KeyStream {
        KeyStream::from_seed(self.seeds.k0 ^ TAG_LAYER1)
    }

    /// Layer-2 permutation stream, K1.
    pub fn layer2(&self) -> KeyStream {
        KeyStream::from_seed(self.seeds.k ^ TAG_LAYER2)
    }

    /// Per-block dihedral stream, K2.
    pub fn dihedral(&self) -> KeyStream {
        KeyStream::from_seed(self.seeds.k ^ TAG_DIHEDRAL)
    }

    /// Per-block negative-positive stream, K3.
    pub fn negpos(&self) -> KeyStream {
        KeyStream::from_seed(self.seeds.k ^ TAG_NEGPOS)
    }
}

pub fn derive_keys(k0: u64, k: u64) -> KeySet {
    KeySet {
        seeds: Seeds { k0, k },
    }
}

impl From<Seeds> for KeySet {
    fn from(seeds: Seeds) -> Self {
        KeySet { seeds }
    }
}
