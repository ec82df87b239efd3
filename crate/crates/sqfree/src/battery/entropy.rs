use serde::{Deserialize, Serialize};

use super::TestResult;
use crate::error::{arg, Result};
use crate::statcore::{chi2_pvalue_at, DEFAULT_ALPHA};

/// Multiplier in `χ² = c · n [ln 2 − (φ^(m) − φ^(m+1))]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyScale {
    /// `c = 2`, under which `χ²` follows `χ²(2^m)` asymptotically.
    #[default]
    Standard,
    /// `c = 1`, the convention of the hand-worked example.
    Halved,
}

/// `Σ π_i ln π_i` over the overlapping `m`-bit patterns of the block wrapped by `m − 1` bits.
pub fn phi(bits: &[u8], m: usize) -> f64 {
    let n = bits.len();
    if m == 0 || m > n {
        return 0.0;
    }
    let mask = (1usize << m) - 1;
    let mut counts = vec![0u64; 1 << m];
    let mut w = 0usize;
    for &b in &bits[..m - 1] {
        w = (w << 1) | b as usize;
    }
    for &b in bits[m - 1..].iter().chain(&bits[..m - 1]) {
        w = ((w << 1) | b as usize) & mask;
        counts[w] += 1;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            p * p.ln()
        })
        .sum()
}

/// Approximate entropy test with pattern length `m`.
pub fn approximate_entropy(bits: &[u8], m: usize, scale: EntropyScale) -> Result<TestResult> {
    if m == 0 || m > 20 {
        return arg(format!("pattern length must lie in 1..=20, got {m}"));
    }
    if bits.len() < m + 1 {
        return arg("block shorter than the pattern");
    }
    let (p0, p1) = (phi(bits, m), phi(bits, m + 1));
    let c = match scale {
        EntropyScale::Standard => 2.0,
        EntropyScale::Halved => 1.0,
    };
    let chi2 = (c * bits.len() as f64 * (std::f64::consts::LN_2 - (p0 - p1))).max(0.0);
    let dof = (1u64 << m) as f64;
    Ok(TestResult::new("approximate_entropy", chi2, chi2_pvalue_at(chi2, dof, DEFAULT_ALPHA)?)
        .param("m", m)
        .param("scale", serde_json::to_value(scale).expect("enum serializes"))
        .aux("phi_m", p0)
        .aux("phi_m1", p1))
}

/// [`approximate_entropy`] with the `2^{m+5}` minimum length enforced.
pub fn approximate_entropy_checked(bits: &[u8], m: usize, scale: EntropyScale) -> Result<TestResult> {
    if m < 20 && bits.len() < 1 << (m + 5) {
        return arg(format!("approximate entropy with m={m} needs at least {} bits", 1 << (m + 5)));
    }
    approximate_entropy(bits, m, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let eps: Vec<u8> = "0110010101".bytes().map(|c| c - b'0').collect();
        assert!((phi(&eps, 3) + 1.64342).abs() < 5e-6);
        // ten wrapped 4-bit windows: 0101 three times, 1010 twice, five singletons
        let want4 = 5.0 * 0.1 * 0.1f64.ln() + 0.2 * 0.2f64.ln() + 0.3 * 0.3f64.ln();
        assert!((phi(&eps, 4) - want4).abs() < 1e-12);
        let r = approximate_entropy(&eps, 3, EntropyScale::Halved).unwrap();
        let chi2 = 10.0 * (std::f64::consts::LN_2 - (phi(&eps, 3) - want4));
        assert!((r.statistic - chi2).abs() < 1e-12);
        let p = chi2_pvalue_at(5.41497, 8.0, DEFAULT_ALPHA).unwrap();
        assert!((p.value - 0.712442).abs() < 5e-6);
    }

    #[test]
    fn constant_block() {
        let zeros = vec![0u8; 1024];
        assert_eq!(phi(&zeros, 4), 0.0);
        let r = approximate_entropy(&zeros, 4, EntropyScale::Halved).unwrap();
        assert!((r.statistic - 1024.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(r.p_value.value < 1e-100);
        assert!(approximate_entropy_checked(&zeros[..511], 4, EntropyScale::Standard).is_err());
    }
}
