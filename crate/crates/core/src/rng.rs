//! Deterministic random streams.
//!
//! Every replicate of a Monte-Carlo batch draws from its own ChaCha8 stream
//! keyed by `(seed, replicate_index)`, so batch results never depend on how
//! replicates are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for a single seeded computation.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for replicate `index` of the batch identified by `seed`.
pub fn replicate(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a labelled sub-computation (null batch, alternative batch,
/// grid point, ...). Distinct labels give unrelated seeds.
pub fn derive(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Well-known labels used when an operation needs several child seeds.
pub mod label {
    pub const NULL: u64 = 1;
    pub const ALTERNATIVE: u64 = 2;
    pub const REFERENCE: u64 = 3;
    pub const REPLICATES: u64 = 4;
    pub const BOOTSTRAP: u64 = 5;
    pub const NOISE: u64 = 6;
    pub const CALIBRATION: u64 = 7;
    pub const GRID: u64 = 1 << 32;
}
