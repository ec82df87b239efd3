use crate::error::{Error, Result};

/// A window of the restricted sequence `S_n` for consecutive ordinals,
/// packed 64 bits to a word, bit `i` of the window at word `i / 64`,
/// position `i % 64`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitSequence {
    start_ordinal: u64,
    len: u64,
    words: Vec<u64>,
}

impl BitSequence {
    pub fn with_capacity(start_ordinal: u64, capacity: u64) -> Self {
        BitSequence { start_ordinal, len: 0, words: Vec::with_capacity(capacity.div_ceil(64) as usize) }
    }

    /// Builds a sequence from unpacked `0`/`1` values (any nonzero byte is 1).
    pub fn from_bits(start_ordinal: u64, bits: &[u8]) -> Self {
        let mut s = Self::with_capacity(start_ordinal, bits.len() as u64);
        for &b in bits {
            s.push(b != 0);
        }
        s
    }

    /// Builds a sequence from packed words; bits past `len` must be zero.
    pub fn from_words(start_ordinal: u64, len: u64, words: Vec<u64>) -> Result<Self> {
        if words.len() as u64 != len.div_ceil(64) {
            return Err(Error::Argument(format!("{} words cannot hold exactly {len} bits", words.len())));
        }
        if len % 64 != 0 && words.last().is_some_and(|w| w >> (len % 64) != 0) {
            return Err(Error::Argument("nonzero bits past the end".into()));
        }
        Ok(BitSequence { start_ordinal, len, words })
    }

    pub fn start_ordinal(&self) -> u64 {
        self.start_ordinal
    }

    /// Ordinal one past the last covered.
    pub fn end_ordinal(&self) -> u64 {
        self.start_ordinal + self.len
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = (self.len % 64) as u32;
        if off == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << off;
        }
        self.len += 1;
    }

    /// Appends `other`, ignoring its start ordinal.
    pub fn append(&mut self, other: &BitSequence) {
        if self.len % 64 == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
        } else {
            for i in 0..other.len {
                self.push(other.get(i));
            }
        }
    }

    /// Bit at window offset `i`.
    #[inline]
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// `μ̂ = 2S - 1` at window offset `i`.
    #[inline]
    pub fn mu_hat(&self, i: u64) -> i8 {
        if self.get(i) {
            1
        } else {
            -1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn check_covered(&self, ordinal: u64, len: u64) -> Result<u64> {
        if ordinal < self.start_ordinal || ordinal + len > self.end_ordinal() {
            return Err(Error::Coverage(format!(
                "ordinals [{ordinal}, {}) outside stored [{}, {})",
                ordinal + len,
                self.start_ordinal,
                self.end_ordinal()
            )));
        }
        Ok(ordinal - self.start_ordinal)
    }

    fn ones_in(&self, off: u64, len: u64) -> u64 {
        let end = off + len;
        let mut ones = 0u64;
        let mut i = off;
        while i < end {
            let w = (i / 64) as usize;
            let b = i % 64;
            let take = (64 - b).min(end - i);
            let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << b };
            ones += (self.words[w] & mask).count_ones() as u64;
            i += take;
        }
        ones
    }

    /// Number of ones among ordinals `[ordinal, ordinal + len)`.
    pub fn count_ones_range(&self, ordinal: u64, len: u64) -> Result<u64> {
        let off = self.check_covered(ordinal, len)?;
        Ok(self.ones_in(off, len))
    }

    /// `Σ μ̂` over ordinals `[ordinal, ordinal + len)`.
    pub fn sum_mu_hat(&self, ordinal: u64, len: u64) -> Result<i64> {
        let ones = self.count_ones_range(ordinal, len)?;
        Ok(2 * ones as i64 - len as i64)
    }

    /// Unpacked `0`/`1` bytes for ordinals `[ordinal, ordinal + len)`.
    pub fn unpack(&self, ordinal: u64, len: u64) -> Result<Vec<u8>> {
        let off = self.check_covered(ordinal, len)?;
        Ok((off..off + len).map(|i| self.get(i) as u8).collect())
    }

    /// Copy of the sub-window `[ordinal, ordinal + len)`.
    pub fn slice(&self, ordinal: u64, len: u64) -> Result<BitSequence> {
        let off = self.check_covered(ordinal, len)?;
        let mut s = BitSequence::with_capacity(ordinal, len);
        if off % 64 == 0 {
            let w0 = (off / 64) as usize;
            s.words.extend_from_slice(&self.words[w0..w0 + len.div_ceil(64) as usize]);
            s.len = len;
            if len % 64 != 0 {
                *s.words.last_mut().unwrap() &= (1u64 << (len % 64)) - 1;
            }
        } else {
            for i in off..off + len {
                s.push(self.get(i));
            }
        }
        Ok(s)
    }
}
