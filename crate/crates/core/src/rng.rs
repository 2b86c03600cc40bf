//! Seeded random streams.
//!
//! All randomness comes from ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`).
//! A run seed is expanded into the 256-bit ChaCha key by
//! `SeedableRng::seed_from_u64` (a PCG32 sequence), and independent
//! consumers of the same seed are separated by ChaCha's 64-bit stream id.
//! Stream ids are `(purpose << 40) | index`, so a purpose may own up to
//! 2^40 independent substreams (e.g. Monte-Carlo blocks).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream purposes. Values are part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Schedule = 1,
    FirstPrice = 2,
    SecondPrice = 3,
    Deviant = 4,
    Homogeneous = 5,
    Focal = 6,
    PaymentBins = 7,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> SimRng {
    debug_assert!(index < (1 << 40));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 40) | index);
    rng
}
