//! Counter-style seed derivation: each trial's generator is a pure function
//! of `(master seed, purpose tag, trial index)`, so trials can run in any
//! order or on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
    tag: u64,
}

impl SeedStream {
    pub fn new(master: u64, tag: &str) -> Self {
        Self {
            master,
            tag: fnv1a(tag.as_bytes()),
        }
    }

    /// A sub-stream, e.g. per grid point.
    pub fn child(&self, tag: &str) -> Self {
        Self {
            master: self.master,
            tag: mix(self.tag ^ fnv1a(tag.as_bytes())),
        }
    }

    pub fn seed(&self, index: u64) -> u64 {
        mix(mix(self.master ^ mix(self.tag))
            .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }

    pub fn rng(&self, index: u64) -> TrialRng {
        TrialRng::seed_from_u64(self.seed(index))
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
