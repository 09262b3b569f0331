//! Deterministic random streams split from a single master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

/// Named random streams. Each stream is independent of the others, so any
/// single component of a scenario can be resampled without disturbing the
/// rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    ApRisAngles = 1,
    PathGains = 2,
    UserChannels = 3,
    ThetaInit = 4,
}

/// Factory for the named streams of one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for `stream`; `index` selects an independent sub-stream
    /// (e.g. one per Monte Carlo trial).
    pub fn rng(&self, stream: Stream, index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master);
        rng.set_stream(((stream as u64) << 48) ^ (index & 0x0000_ffff_ffff_ffff));
        rng
    }
}

/// Draws a circularly symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}
