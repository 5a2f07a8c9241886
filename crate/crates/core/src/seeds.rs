//! Counter-based seed derivation.
//!
//! Every random stream in an experiment is keyed by the master seed plus a
//! path of labels (trial index, purpose, node). Streams never share state, so
//! enabling another algorithm or another output does not shift any draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Labels for the independent random streams of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Graph = 1,
    Trial = 2,
    Support = 3,
    InitialWeights = 4,
    Drift = 5,
    Inputs = 6,
    Noise = 7,
    Instance = 8,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds a path of labels into a child seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}
