use super::bits::BitSequence;
use super::count::nth_squarefree;
use super::sieve::{omega_segment, PrimeTable, Scratch, SieveConfig};
use crate::error::{arg, Error, Result};
use std::sync::Arc;

/// Forward cursor over the square-free numbers, yielding `ω(sqf_n)` for
/// consecutive ordinals. Sieves one segment at a time.
pub struct SqfCursor {
    cfg: SieveConfig,
    primes: Arc<PrimeTable>,
    primes_limit: u64,
    next_int: u64,
    ordinal: u64,
    omegas: Vec<i8>,
    values: Vec<u64>,
    pos: usize,
    raw: Vec<i8>,
    scratch: Scratch,
    track_values: bool,
}

impl SqfCursor {
    /// Cursor whose next item is ordinal `n`.
    pub fn at_ordinal(n: u64) -> Result<Self> {
        Self::at_ordinal_with(n, SieveConfig::default())
    }

    pub fn at_ordinal_with(n: u64, cfg: SieveConfig) -> Result<Self> {
        if n == 0 {
            return arg("ordinals start at 1");
        }
        let x = nth_squarefree(n)?;
        Ok(SqfCursor {
            cfg,
            primes: super::sieve::base_primes(2),
            primes_limit: 0,
            next_int: x,
            ordinal: n,
            omegas: Vec::new(),
            values: Vec::new(),
            pos: 0,
            raw: Vec::new(),
            scratch: Scratch::default(),
            track_values: false,
        })
    }

    /// Also record the integer value of each square-free number (see
    /// [`SqfCursor::next_value`]).
    pub fn with_values(mut self) -> Self {
        self.track_values = true;
        self
    }

    /// Ordinal of the next item.
    pub fn ordinal(&self) -> u64 {
        self.ordinal
    }

    fn refill(&mut self) -> Result<()> {
        let lo = self.next_int;
        let n = self.cfg.segment_len as u64;
        let hi = lo.checked_add(n).ok_or_else(|| Error::Resource("integer overflow".into()))?;
        let root = (hi - 1).isqrt();
        if root > self.primes_limit {
            if root > self.cfg.max_base_prime {
                return Err(Error::Resource(format!("sieving near {hi} needs base primes to {root}")));
            }
            // grow in steps so a long forward scan rarely reloads
            let want = (root + root / 4).min(self.cfg.max_base_prime);
            self.primes = super::sieve::base_primes(want);
            self.primes_limit = want;
        }
        self.raw.resize(n as usize, 0);
        omega_segment(lo, &mut self.raw, &self.primes, &mut self.scratch);
        self.omegas.clear();
        self.values.clear();
        for (i, &o) in self.raw.iter().enumerate() {
            if o >= 0 {
                self.omegas.push(o);
                if self.track_values {
                    self.values.push(lo + i as u64);
                }
            }
        }
        self.pos = 0;
        self.next_int = hi;
        Ok(())
    }

    #[inline]
    fn ensure(&mut self) -> Result<()> {
        while self.pos >= self.omegas.len() {
            self.refill()?;
        }
        Ok(())
    }

    /// `ω` of the next square-free number.
    pub fn next_omega(&mut self) -> Result<i8> {
        self.ensure()?;
        let o = self.omegas[self.pos];
        self.pos += 1;
        self.ordinal += 1;
        Ok(o)
    }

    /// `(sqf_n, ω(sqf_n))` for the next ordinal; needs [`SqfCursor::with_values`].
    pub fn next_value(&mut self) -> Result<(u64, i8)> {
        if !self.track_values {
            return arg("cursor was created without value tracking");
        }
        self.ensure()?;
        let r = (self.values[self.pos], self.omegas[self.pos]);
        self.pos += 1;
        self.ordinal += 1;
        Ok(r)
    }

    /// Calls `f` with the ω values of the next `count` ordinals, in runs.
    pub fn for_each_run<F: FnMut(&[i8])>(&mut self, mut count: u64, mut f: F) -> Result<()> {
        while count > 0 {
            self.ensure()?;
            let avail = (self.omegas.len() - self.pos) as u64;
            let k = avail.min(count) as usize;
            f(&self.omegas[self.pos..self.pos + k]);
            self.pos += k;
            self.ordinal += k as u64;
            count -= k as u64;
        }
        Ok(())
    }

    pub fn skip(&mut self, count: u64) -> Result<()> {
        self.for_each_run(count, |_| {})
    }

    /// Sum of `μ̂` over the next `count` ordinals.
    pub fn sum_mu_hat(&mut self, count: u64) -> Result<i64> {
        let mut odd = 0u64;
        self.for_each_run(count, |r| odd += r.iter().filter(|&&o| o & 1 == 1).count() as u64)?;
        Ok(count as i64 - 2 * odd as i64)
    }

    /// The next `count` bits `S_n` as a packed sequence.
    pub fn take_bits(&mut self, count: u64) -> Result<BitSequence> {
        let mut seq = BitSequence::with_capacity(self.ordinal, count);
        self.for_each_run(count, |r| {
            for &o in r {
                seq.push(o & 1 == 0);
            }
        })?;
        Ok(seq)
    }

    /// The next `count` bits unpacked, one `0`/`1` byte each.
    pub fn take_unpacked(&mut self, count: u64) -> Result<Vec<u8>> {
        let mut v = Vec::with_capacity(count as usize);
        self.for_each_run(count, |r| v.extend(r.iter().map(|&o| (o & 1 == 0) as u8)))?;
        Ok(v)
    }
}
