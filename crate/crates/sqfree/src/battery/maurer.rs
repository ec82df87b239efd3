use super::TestResult;
use crate::error::{arg, Result};
use crate::statcore::erfc_pvalue;

pub const MAURER_M: usize = 6;
pub const MAURER_Q: usize = 640;
pub const MAURER_K: usize = 233_227;
pub const MAURER_MEAN: f64 = 5.2177052;
pub const MAURER_SIGMA: f64 = 0.0020213;

/// Bits consumed by [`maurer_universal`].
pub const MAURER_LEN: usize = MAURER_M * (MAURER_Q + MAURER_K);

/// Scan state after the initialisation segment and after each test block.
#[derive(Debug, Clone, PartialEq)]
pub struct MaurerTrace {
    /// `(block number, table)` with blocks numbered from 1; the first entry is block `Q`.
    pub states: Vec<(usize, Vec<usize>)>,
    pub sum: f64,
    pub f_n: f64,
}

fn pattern(block: &[u8]) -> usize {
    block.iter().fold(0, |a, &b| (a << 1) | b as usize)
}

/// Sum of `log_2(i − T_j)` over the `K` test blocks following `Q`
/// initialisation blocks of `m` bits; `observe` sees the table after each step.
fn scan(bits: &[u8], m: usize, q: usize, k: usize, mut observe: impl FnMut(usize, &[usize])) -> f64 {
    let mut table = vec![0usize; 1 << m];
    let mut blocks = bits.chunks_exact(m);
    for (i, b) in blocks.by_ref().take(q).enumerate() {
        table[pattern(b)] = i + 1;
    }
    observe(q, &table);
    let mut sum = 0.0;
    for (i, b) in blocks.take(k).enumerate() {
        let i = q + i + 1;
        let j = pattern(b);
        sum += ((i - table[j]) as f64).log2();
        table[j] = i;
        observe(i, &table);
    }
    sum
}

/// Full table history for arbitrary `(m, q)`, using every remaining block as a test block.
pub fn maurer_trace(bits: &[u8], m: usize, q: usize) -> Result<MaurerTrace> {
    if m == 0 || m > 16 {
        return arg(format!("block size must lie in 1..=16, got {m}"));
    }
    let total = bits.len() / m;
    if total <= q {
        return arg("no test blocks after the initialisation segment");
    }
    let k = total - q;
    let mut states = Vec::with_capacity(k + 1);
    let sum = scan(bits, m, q, k, |i, t| states.push((i, t.to_vec())));
    Ok(MaurerTrace { states, sum, f_n: sum / k as f64 })
}

/// Maurer's universal statistic on the first [`MAURER_LEN`] bits with
/// `(M, Q, K) = (6, 640, 233227)`.
pub fn maurer_universal(bits: &[u8]) -> Result<TestResult> {
    if bits.len() < MAURER_LEN {
        return arg(format!("universal test needs at least {MAURER_LEN} bits, got {}", bits.len()));
    }
    let f_n = scan(&bits[..MAURER_LEN], MAURER_M, MAURER_Q, MAURER_K, |_, _| {}) / MAURER_K as f64;
    let v = (f_n - MAURER_MEAN) / MAURER_SIGMA;
    Ok(TestResult::new("maurer_universal", f_n, erfc_pvalue(v))
        .param("m", MAURER_M)
        .param("q", MAURER_Q)
        .param("k", MAURER_K)
        .aux("z", v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_table_states() {
        // blocks 10 01 00 01 | 10 01 00 00 11 01
        let bits: Vec<u8> = "10010001100100001101".bytes().map(|c| c - b'0').collect();
        let tr = maurer_trace(&bits, 2, 4).unwrap();
        let want: [(usize, [usize; 4]); 7] = [
            (4, [3, 4, 1, 0]),
            (5, [3, 4, 5, 0]),
            (6, [3, 6, 5, 0]),
            (7, [7, 6, 5, 0]),
            (8, [8, 6, 5, 0]),
            (9, [8, 6, 5, 9]),
            (10, [8, 10, 5, 9]),
        ];
        assert_eq!(tr.states.len(), want.len());
        for ((i, t), (wi, wt)) in tr.states.iter().zip(want) {
            assert_eq!(*i, wi);
            assert_eq!(t.as_slice(), wt.as_slice());
        }
        let sum = 2.0 + 1.0 + 2.0 + 0.0 + 9f64.log2() + 2.0;
        assert!((tr.sum - sum).abs() < 1e-12);
        assert!((tr.f_n - sum / 6.0).abs() < 1e-12);
    }

    #[test]
    fn mean_gives_unit_pvalue() {
        assert_eq!(erfc_pvalue((MAURER_MEAN - MAURER_MEAN) / MAURER_SIGMA).value, 1.0);
        assert_eq!(MAURER_LEN, 1_403_202);
        assert!(maurer_universal(&vec![0u8; MAURER_LEN - 1]).is_err());
    }
}
