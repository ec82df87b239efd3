use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::TestResult;
use crate::error::{arg, Result};
use crate::statcore::chi2_pvalue;

/// Probability that a uniform random `h × h` matrix over GF(2) has rank `r`:
/// `2^{r(2h−r)−h²} Π_{i<r} (1−2^{i−h})² / (1−2^{i−r})`.
pub fn rank_probability(h: u32, r: u32) -> f64 {
    if r > h {
        return 0.0;
    }
    let (hf, rf) = (h as f64, r as f64);
    let mut ln = (rf * (2.0 * hf - rf) - hf * hf) * std::f64::consts::LN_2;
    for i in 0..r {
        let a = 1.0 - (i as f64 - hf).exp2();
        let b = 1.0 - (i as f64 - rf).exp2();
        ln += 2.0 * a.ln() - b.ln();
    }
    ln.exp()
}

/// Exact rational form of [`rank_probability`].
pub fn rank_probability_exact(h: u32, r: u32) -> BigRational {
    if r > h {
        return BigRational::zero();
    }
    let two = |e: u32| BigInt::one() << e;
    let mut p = BigRational::one();
    for i in 0..r {
        let a = BigRational::new(two(h) - two(i), two(h));
        let b = BigRational::new(two(r) - two(i), two(r));
        p = p * &a * &a / b;
    }
    let e = (r * (2 * h - r)) as i64 - (h * h) as i64;
    if e >= 0 {
        p * BigRational::from_integer(two(e as u32))
    } else {
        p / BigRational::from_integer(two((-e) as u32))
    }
}

/// Rank over GF(2) of a matrix given as rows of at most 64 bits.
pub fn gf2_rank(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for col in (0..64).rev() {
        let bit = 1u64 << col;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Binary matrix rank test on `⌊n/h²⌋` row-major `h × h` matrices.
pub fn matrix_rank(bits: &[u8], h: usize) -> Result<TestResult> {
    if !(2..=64).contains(&h) {
        return arg(format!("matrix size must lie in 2..=64, got {h}"));
    }
    let per = h * h;
    if bits.len() < 38 * per {
        return arg(format!("matrix rank with h={h} needs at least {} bits", 38 * per));
    }
    let mut counts = [0u64; 3];
    let mut rows = vec![0u64; h];
    for mat in bits.chunks_exact(per) {
        for (row, chunk) in rows.iter_mut().zip(mat.chunks_exact(h)) {
            *row = chunk.iter().fold(0u64, |a, &b| (a << 1) | b as u64);
        }
        let r = gf2_rank(&mut rows);
        counts[if r == h {
            0
        } else if r + 1 == h {
            1
        } else {
            2
        }] += 1;
    }
    let n = (bits.len() / per) as f64;
    let p_full = rank_probability(h as u32, h as u32);
    let p_minus = rank_probability(h as u32, h as u32 - 1);
    let probs = [p_full, p_minus, 1.0 - p_full - p_minus];
    let chi2: f64 = counts.iter().zip(probs).map(|(&c, p)| (c as f64 - n * p).powi(2) / (n * p)).sum();
    Ok(TestResult::new("matrix_rank", chi2, chi2_pvalue(chi2, 2)?)
        .param("h", h)
        .param("n", bits.len())
        .aux("counts", counts.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        assert_eq!(rank_probability_exact(2, 2), BigRational::new(6.into(), 16.into()));
        assert!((rank_probability(2, 2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn large_limit() {
        assert!((rank_probability(32, 32) - 0.2888).abs() < 1e-4);
        assert!((rank_probability(32, 31) - 0.5776).abs() < 1e-4);
        assert!((rank_probability(32, 30) - 0.1284).abs() < 1e-4);
    }

    #[test]
    fn elimination() {
        let mut id: Vec<u64> = (0..32).map(|i| 1u64 << i).collect();
        assert_eq!(gf2_rank(&mut id), 32);
        let mut dup = vec![0b1011, 0b0110, 0b1101];
        assert_eq!(gf2_rank(&mut dup), 2);
        let mut zero = vec![0u64; 5];
        assert_eq!(gf2_rank(&mut zero), 0);
    }
}
