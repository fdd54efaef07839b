//! Seed derivation and random vectors.
//!
//! Every random draw in setup is keyed by `(root seed, level, stream)` so runs
//! are reproducible and distinct consumers never share a sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    CfSplit = 1,
    SmootherPoly = 2,
    CoarsePoly = 3,
    TruncationRhs = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, level: usize, stream: Stream) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ level as u64) ^ stream as u64)
}

/// Components uniform in `[-1, 1)`, scaled to unit 2-norm.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nrm = crate::sparse::norm2(&v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    v
}
