//! Deterministic randomness.
//!
//! All stochastic steppers draw from an [`RngStream`]: a ChaCha8 counter-based
//! generator with standard normals produced by the rand_distr ziggurat. Within
//! one build of this crate, the same seed yields a bit-identical draw sequence.
//! Vector draws consume the stream coordinate-major (coordinate 0 first), so
//! two draws of length p and one draw of length 2p see the same values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::vector::ParamVector;

/// Anything that can supply standard-normal noise and uniform indices to a
/// stepper. [`RngStream`] is the production source; [`ZeroNoise`] substitutes
/// ζ ≡ 0 for zero-temperature limit checks.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;

    /// Uniform draw from `0..n`. Used for minibatch index sampling.
    fn index_below(&mut self, n: usize) -> usize;

    /// p i.i.d. standard normals, consumed coordinate-major.
    fn gaussian_vector(&mut self, p: usize) -> ParamVector {
        let mut values = Vec::with_capacity(p);
        for _ in 0..p {
            values.push(self.standard_normal());
        }
        ParamVector::from_vec(values).expect("standard normal draws are finite")
    }
}

/// Seeded, counter-based random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream derived from the same seed. Streams with
    /// different labels never overlap.
    pub fn split(&self, label: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(label);
        Self {
            seed: self.seed,
            rng,
        }
    }
}

impl NoiseSource for RngStream {
    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn index_below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Noise source that always returns ζ = 0. Index draws still need an answer;
/// they return 0, which is only meaningful for full-batch objectives.
#[derive(Debug, Clone, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn standard_normal(&mut self) -> f64 {
        0.0
    }

    fn index_below(&mut self, _n: usize) -> usize {
        0
    }
}
