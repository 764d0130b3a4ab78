//! Deterministic seed derivation.
//!
//! Every random stream in a run (problem data, mixing schedule, per-agent
//! oracles) is keyed by a `u64` derived from the master seed through
//! [`derive`], so realizations are independent and reproducible no matter
//! which worker executes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer applied to `parent ^ golden * (index + 1)`.
pub fn derive(parent: u64, index: u64) -> u64 {
    let mut z = parent ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha stream addressed by `(seed, stream)`; random access by stream id.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Stream tags used when deriving child seeds.
pub(crate) const DATA: u64 = 0xDA7A;
pub(crate) const CERTIFICATE: u64 = 0xCE57;
pub(crate) const SCHEDULE: u64 = 0x5C4E;
pub(crate) const ORACLE: u64 = 0x0AC1_E000;
pub(crate) const INITIAL: u64 = 0x1417;
pub(crate) const REALIZATION: u64 = 0x4EA1_0000;
