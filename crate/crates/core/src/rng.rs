//! Seed derivation and Gaussian sampling.
//!
//! Every random quantity in the crate is drawn from a [`SimRng`] seeded by a
//! 64-bit value derived from a master seed and a path of integer coordinates
//! (grid index, replicate, trial, ...). Two runs that derive the same path get
//! the same stream no matter how the work was scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Counter-based stream cipher generator used for all sampling.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of coordinates.
///
/// The map is order-sensitive: `derive_seed(s, &[1, 2]) != derive_seed(s, &[2, 1])`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, &p| {
        splitmix64(h ^ splitmix64(p.wrapping_mul(GOLDEN).wrapping_add(1)))
    })
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(master, path))
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}
