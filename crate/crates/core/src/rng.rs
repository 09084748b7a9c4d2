//! Seeded generators.
//!
//! Every random draw in the crate goes through [`seeded`] or [`child`], both
//! ChaCha8 generators, whose output stream is fixed across platforms.
//!
//! `child(seed, t)` keys ChaCha8 with the same 256-bit key that
//! `seeded(seed)` uses and selects stream `t + 1`. Streams are independent
//! sequences of the same cipher, so tree `t` always sees the same draws no
//! matter how trees are scheduled across workers. Stream 0 belongs to the
//! root generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
