//! Seed handling shared by every stochastic component.
//!
//! All randomness flows from a master seed. Child seeds are derived with a
//! SplitMix64 step so that tree `i` of a forest, or repetition `r` of a
//! protocol, always sees the same stream regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`, tagged by `stream` so that
/// different consumers (trees, repetitions, phantoms) never collide.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(master ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93)) ^ index)
}

pub mod stream {
    pub const TREE: u64 = 1;
    pub const REPETITION: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const PHANTOM: u64 = 4;
    pub const SUBSAMPLE: u64 = 5;
    pub const RANKING: u64 = 6;
    pub const DATASET: u64 = 7;
}

/// Standard normal draw (Box-Muller, one value per call).
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    crate::num::sqrt(-2.0 * crate::num::ln(u1)) * crate::num::cos(core::f64::consts::TAU * u2)
}
