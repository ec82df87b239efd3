//! Seeded randomness. Every random choice draws from a ChaCha8 substream
//! addressed by `(master seed, index)`, so results never depend on how work
//! is scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(master);
    r.set_stream(index);
    r
}

/// `n` fair bits, one `0`/`1` byte each.
pub fn fair_bits(rng: &mut impl RngCore, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = rng.next_u64();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|i| ((w >> i) & 1) as u8));
    }
    out
}
