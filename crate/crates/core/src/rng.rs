//! Seeded randomness.
//!
//! Every component draws from its own ChaCha8 stream derived from the run
//! seed, so changing how one component consumes randomness never shifts the
//! numbers another component sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named streams carved out of a single run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    CodebookInit = 1,
    SyntheticData = 2,
    OnlineSampling = 3,
    KMeansInit = 4,
    NeuronPicks = 5,
}

impl Stream {
    pub const ALL: [Stream; 5] = [
        Stream::CodebookInit,
        Stream::SyntheticData,
        Stream::OnlineSampling,
        Stream::KMeansInit,
        Stream::NeuronPicks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stream::CodebookInit => "codebook-init",
            Stream::SyntheticData => "synthetic-data",
            Stream::OnlineSampling => "online-sampling",
            Stream::KMeansInit => "kmeans-init",
            Stream::NeuronPicks => "neuron-picks",
        }
    }
}

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
