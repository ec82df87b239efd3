//! Segmented Möbius sieve, square-free ordinals and the restricted sequence.
//!
//! Integers are sieved in segments. For each segment the primes up to
//! `√hi` are divided out, multiples of `p²` are marked, and a residual
//! cofactor left after dividing out the small primes is necessarily a single
//! prime above `√hi`. The same kernel yields `ω(m)` for square-free `m`, so
//! μ, ω and the square-free indicator all come from one pass.
//!
//! Ordinals follow `sqf_1 = 1`: the square-free numbers are
//! `1, 2, 3, 5, 6, 7, 10, 11, ...`.

mod bits;
mod count;
mod cursor;
mod sieve;
mod store;

pub use bits::BitSequence;
pub use count::{nth_squarefree, squarefree_count};
pub use cursor::SqfCursor;
pub(crate) use sieve::omega_to_mu;
pub use sieve::{
    base_primes, for_each_segment, mobius_range, mobius_range_with, mu_table, par_fold_segments, MobiusWindow,
    PrimeTable, SieveConfig, DEFAULT_SEGMENT_LEN,
};
pub use store::{read_sequence, write_sequence, FORMAT_VERSION, MAGIC};

use crate::error::{arg, Result};
use crate::par;

/// Ordinals per independently generated piece of a long sequence.
const PIECE: u64 = 1 << 24;

/// The restricted sequence `S_n = (μ(sqf_n) + 1) / 2` for
/// `n = start_ordinal .. start_ordinal + length`.
pub fn restricted_sequence(start_ordinal: u64, length: u64) -> Result<BitSequence> {
    if start_ordinal == 0 {
        return arg("ordinals start at 1");
    }
    let pieces = length.div_ceil(PIECE) as usize;
    let parts = par::try_map_range(pieces, |i| {
        let off = i as u64 * PIECE;
        let len = PIECE.min(length - off);
        let mut cur = SqfCursor::at_ordinal(start_ordinal + off)?;
        cur.take_bits(len)
    })?;
    let mut seq = BitSequence::with_capacity(start_ordinal, length);
    for p in &parts {
        seq.append(p);
    }
    Ok(seq)
}
