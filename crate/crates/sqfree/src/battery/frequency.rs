use std::f64::consts::{PI, SQRT_2};

use super::{mu_hat_sum, TestResult};
use crate::error::{arg, Error, Result};
use crate::statcore::{chi2_pvalue, erfc, erfc_pvalue, PValue, DEFAULT_ALPHA};

fn need(bits: &[u8], min: usize, test: &str) -> Result<()> {
    if bits.len() < min {
        return arg(format!("{test} needs at least {min} bits, got {}", bits.len()));
    }
    Ok(())
}

/// Frequency of ones: `v = |Σ μ̂| / √n`, `P = erfc(v/√2)`.
pub fn monobit(bits: &[u8]) -> Result<TestResult> {
    need(bits, 100, "monobit")?;
    let n = bits.len() as f64;
    let s = mu_hat_sum(bits);
    let v = s.unsigned_abs() as f64 / n.sqrt();
    Ok(TestResult::new("monobit", v, erfc_pvalue(v)).param("n", bits.len()).aux("sum", s))
}

/// χ² over non-overlapping `m`-tuples against the uniform cell probability `2^-m`.
pub fn serial_frequency(bits: &[u8], m: u32) -> Result<TestResult> {
    if !(2..=5).contains(&m) {
        return arg(format!("serial frequency supports m in 2..=5, got {m}"));
    }
    let cells = 1usize << m;
    need(bits, 5 * cells * m as usize, "serial frequency")?;
    let mut counts = vec![0u64; cells];
    for t in bits.chunks_exact(m as usize) {
        counts[t.iter().fold(0usize, |a, &b| (a << 1) | b as usize)] += 1;
    }
    let tuples = (bits.len() / m as usize) as f64;
    let expected = tuples / cells as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    Ok(TestResult::new("serial_frequency", chi2, chi2_pvalue(chi2, cells as u32 - 1)?)
        .param("m", m)
        .param("n", bits.len())
        .aux("counts", counts))
}

/// `V = 1 + Σ_{k≥2} r(k)` where `r(k) = 1` when bit `k` differs from bit `k-1`.
pub fn kinks(bits: &[u8]) -> u64 {
    if bits.is_empty() {
        return 0;
    }
    1 + bits.windows(2).filter(|w| w[0] != w[1]).count() as u64
}

/// Runs test: number of kinks `V = 1 + #{k : ε_k ≠ ε_{k+1}}`.
pub fn oscillation(bits: &[u8]) -> Result<TestResult> {
    need(bits, 100, "oscillation")?;
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b != 0).count() as f64;
    let rho = ones / n;
    if rho == 0.0 || rho == 1.0 {
        return Err(Error::Degenerate("oscillation needs both symbols present".into()));
    }
    let v_obs = kinks(bits);
    let q = rho * (1.0 - rho);
    let v = (v_obs as f64 - 2.0 * n * q) / (2.0 * q * n.sqrt());
    Ok(TestResult::new("oscillation", v, erfc_pvalue(v))
        .param("n", bits.len())
        .aux("kinks", v_obs)
        .aux("expected_kinks", 1.0 + 2.0 * (n - 1.0) * q))
}

pub const LONGEST_RUN_LEN: usize = 6272;
const LONGEST_RUN_M: usize = 128;
/// Class probabilities for the longest run in 128 bits: `≤4, 5, 6, 7, 8, ≥9`.
pub const LONGEST_RUN_PI: [f64; 6] = [0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124];

/// Category index of the longest run of ones in a 128-bit sub-block.
pub fn longest_run_class(sub: &[u8]) -> usize {
    let (mut best, mut cur) = (0usize, 0usize);
    for &b in sub {
        cur = if b != 0 { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best.clamp(4, 9) - 4
}

/// Longest run of ones over `N = 49` sub-blocks of 128 bits.
pub fn longest_run_of_ones(bits: &[u8]) -> Result<TestResult> {
    if bits.len() != LONGEST_RUN_LEN {
        return arg(format!("longest run test takes exactly {LONGEST_RUN_LEN} bits, got {}", bits.len()));
    }
    let mut counts = [0u64; 6];
    for sub in bits.chunks_exact(LONGEST_RUN_M) {
        counts[longest_run_class(sub)] += 1;
    }
    let chi2 = longest_run_chi2(&counts);
    Ok(TestResult::new("longest_run_of_ones", chi2, chi2_pvalue(chi2, 5)?)
        .param("n", bits.len())
        .param("m", LONGEST_RUN_M)
        .aux("counts", counts.to_vec()))
}

pub(crate) fn longest_run_chi2(counts: &[u64; 6]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(LONGEST_RUN_PI)
        .map(|(&c, p)| {
            let e = n as f64 * p;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// `G(z) = P(max_{t≤1} |W_t| ≤ z)` for standard Brownian motion.
pub fn cusum_distribution(z: f64) -> f64 {
    1.0 - cusum_tail(z)
}

/// `1 − G(z)`, evaluated without cancellation for large `z`.
pub fn cusum_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.0 {
        let mut g = 0.0;
        for j in 0.. {
            let k = (2 * j + 1) as f64;
            let t = (-k * k * PI * PI / (8.0 * z * z)).exp() / k;
            g += if j % 2 == 0 { t } else { -t };
            if t < 1e-17 {
                break;
            }
        }
        return 1.0 - 4.0 / PI * g;
    }
    let mut tail = 0.0;
    for j in 0.. {
        let t = erfc((2 * j + 1) as f64 * z / SQRT_2);
        tail += if j % 2 == 0 { t } else { -t };
        if t < 1e-12 * tail.abs().max(1e-300) || t == 0.0 {
            break;
        }
    }
    (2.0 * tail).clamp(0.0, 1.0)
}

/// Leading large-`z` behaviour `4/(√(2π) z) e^{-z²/2}` of `1 − G(z)`.
pub fn cusum_asymptote(z: f64) -> f64 {
    4.0 / ((2.0 * PI).sqrt() * z) * (-z * z / 2.0).exp()
}

/// Largest excursion of the forward partial sums of μ̂.
pub fn cumulative_sums(bits: &[u8]) -> Result<TestResult> {
    need(bits, 100, "cumulative sums")?;
    let (mut s, mut t) = (0i64, 0i64);
    for &b in bits {
        s += if b != 0 { 1 } else { -1 };
        t = t.max(s.abs());
    }
    let z = t as f64 / (bits.len() as f64).sqrt();
    Ok(TestResult::new("cumulative_sums", z, PValue::new(cusum_tail(z), DEFAULT_ALPHA))
        .param("n", bits.len())
        .aux("max_excursion", t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monobit_extremes() {
        let alt: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let r = monobit(&alt).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value.value, 1.0);
        let ones = vec![1u8; 100];
        let r = monobit(&ones).unwrap();
        assert!((r.statistic - 10.0).abs() < 1e-12);
        assert!(r.p_value.value < 1e-21 && r.p_value.value > 0.0);
        assert!(monobit(&ones[..99]).is_err());
    }

    #[test]
    fn monobit_table_row() {
        let mut bits = vec![1u8; 50006];
        bits.extend(std::iter::repeat_n(0u8, 49994));
        let r = monobit(&bits).unwrap();
        assert!((r.statistic - 0.0379).abs() < 1e-3);
        assert!((r.p_value.value - 0.96).abs() < 0.01);
    }

    #[test]
    fn serial_balanced() {
        let mut bits = Vec::new();
        for _ in 0..10 {
            bits.extend_from_slice(&[0, 0, 0, 1, 1, 0, 1, 1]);
        }
        let r = serial_frequency(&bits, 2).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value.value, 1.0);
        assert!(serial_frequency(&bits[..8], 2).is_err());
        assert!(serial_frequency(&bits, 6).is_err());
    }

    #[test]
    fn oscillation_counts() {
        let alt: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        let r = oscillation(&alt).unwrap();
        assert_eq!(r.aux.as_ref().unwrap()["kinks"], 200);
        let ex: Vec<u8> = "000110101000110".bytes().map(|c| c - b'0').collect();
        assert_eq!(kinks(&ex), 9);
        assert_eq!(kinks(&[1, 0, 1]), 3);
        assert!(matches!(oscillation(&[1u8; 100]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn longest_run_classes() {
        assert!((LONGEST_RUN_PI.iter().sum::<f64>() - 1.0).abs() < 1e-4);
        assert_eq!(longest_run_class(&[1u8; 128]), 5);
        assert_eq!(longest_run_class(&[0u8; 128]), 0);
        let mut sub = vec![0u8; 128];
        sub[10..17].fill(1);
        assert_eq!(longest_run_class(&sub), 3);
        let counts: [u64; 6] = [6, 12, 12, 9, 5, 5];
        assert!(longest_run_chi2(&counts) < 0.5);
        assert!(longest_run_of_ones(&[0u8; 6271]).is_err());
    }

    #[test]
    fn cusum_forms_agree() {
        for z in [0.3, 0.7, 0.99, 1.0, 1.5] {
            let mut dual = 0.0;
            for j in 0..50 {
                let k = (2 * j + 1) as f64;
                let t = (-k * k * PI * PI / (8.0 * z * z)).exp() / k;
                dual += if j % 2 == 0 { t } else { -t };
            }
            let mut direct = 0.0;
            for j in 0..50 {
                let t = erfc((2 * j + 1) as f64 * z / SQRT_2);
                direct += if j % 2 == 0 { t } else { -t };
            }
            assert!((4.0 / PI * dual - (1.0 - 2.0 * direct)).abs() < 1e-12, "z={z}");
        }
        assert!((cusum_distribution(4.0) - (1.0 - cusum_asymptote(4.0))).abs() < 1e-4);
        assert!(cusum_distribution(40.0) == 1.0);
        assert!(cusum_distribution(0.05) < 1e-50);
    }
}
