//! Reproducible random-number streams.
//!
//! Every sampling operation in this crate is parameterized by an
//! [`RngStream`]: a (seed, stream) pair naming one independent ChaCha8
//! stream. The same pair always yields the bit-identical draw sequence, no
//! matter how work is scheduled across threads, which is what makes corpus
//! runs and planning grids byte-reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives a child stream. Children of distinct indices (and their own
    /// descendants) do not collide in practice: the index is mixed into the
    /// stream id with a SplitMix64 finalizer.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream: mix(self.stream, index),
        }
    }

    /// Instantiates the counter-based generator positioned at the start of
    /// this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn mix(stream: u64, index: u64) -> u64 {
    let mut z = stream ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
