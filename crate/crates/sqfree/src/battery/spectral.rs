use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{mu_hat_sum, TestResult};
use crate::error::{arg, Error, Result};
use crate::rng::{fair_bits, substream};
use crate::statcore::erfc_pvalue;

/// Peak height below which 95% of the DFT moduli of a random block fall.
pub fn dft_threshold(n: usize) -> f64 {
    ((1.0f64 / 0.05).ln() * n as f64).sqrt()
}

fn dft_moduli(values: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// Spectral test on the ±1 values: counts DFT moduli below [`dft_threshold`]
/// among the first `n/2` coefficients.
pub fn spectral_dft(bits: &[u8]) -> Result<TestResult> {
    let n = bits.len();
    if n < 1000 || n % 2 != 0 {
        return arg(format!("spectral test needs an even length >= 1000, got {n}"));
    }
    let x: Vec<f64> = bits.iter().map(|&b| if b != 0 { 1.0 } else { -1.0 }).collect();
    let moduli = dft_moduli(&x);
    let t = dft_threshold(n);
    let below = moduli[..n / 2].iter().filter(|&&m| m < t).count();
    let n0 = 0.95 * n as f64 / 2.0;
    let v = (below as f64 - n0) / (n as f64 * 0.95 * 0.05 / 4.0).sqrt();
    Ok(TestResult::new("spectral_dft", v, erfc_pvalue(v)).param("n", n).aux("threshold", t).aux("below", below))
}

/// Mean-centred, variance-normalised autocorrelation
/// `γ(s) = ⟨(x_k − x̄)(x_{k+s} − x̄)⟩ / var` of each ±1 block, averaged over
/// blocks for `s = 0..=max_lag`.
pub fn autocorrelation(blocks: &[Vec<u8>], max_lag: usize) -> Result<Vec<f64>> {
    if blocks.is_empty() {
        return arg("autocorrelation needs at least one block");
    }
    let mut f = vec![0.0; max_lag + 1];
    for block in blocks {
        let g = block_autocorrelation(block, max_lag)?;
        for (a, b) in f.iter_mut().zip(g) {
            *a += b;
        }
    }
    let n = blocks.len() as f64;
    Ok(f.into_iter().map(|v| v / n).collect())
}

/// `γ(s)` for a single block.
pub fn block_autocorrelation(bits: &[u8], max_lag: usize) -> Result<Vec<f64>> {
    let t = bits.len();
    if t < 10 * max_lag.max(1) {
        return arg(format!("autocorrelation to lag {max_lag} needs blocks of >= {} bits", 10 * max_lag.max(1)));
    }
    let mean = mu_hat_sum(bits) as f64 / t as f64;
    let x: Vec<f64> = bits.iter().map(|&b| if b != 0 { 1.0 - mean } else { -1.0 - mean }).collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / t as f64;
    if var == 0.0 {
        return Err(Error::Degenerate("constant block has no autocorrelation".into()));
    }
    Ok((0..=max_lag)
        .map(|s| {
            let c: f64 = x[..t - s].iter().zip(&x[s..]).map(|(a, b)| a * b).sum();
            c / (t - s) as f64 / var
        })
        .collect())
}

/// Moduli of the DFT of an averaged correlation function, normalised by its length.
pub fn correlation_dft(f: &[f64]) -> Vec<f64> {
    if f.is_empty() {
        return Vec::new();
    }
    let n = f.len() as f64;
    dft_moduli(f).into_iter().map(|m| m / n.sqrt()).collect()
}

/// Scalar product `μ̂ · r` with a seeded fair ±1 sequence `r`; statistic `|μ̂ · r| / √N`.
pub fn cross_correlation_random(bits: &[u8], seed: u64) -> Result<TestResult> {
    if bits.is_empty() {
        return arg("cross correlation needs a non-empty block");
    }
    let r = fair_bits(&mut substream(seed, 0), bits.len());
    let dot: i64 = bits.iter().zip(&r).map(|(&a, &b)| if a == b { 1i64 } else { -1 }).sum();
    let v = dot.unsigned_abs() as f64 / (bits.len() as f64).sqrt();
    Ok(TestResult::new("cross_correlation_random", v, erfc_pvalue(v))
        .param("n", bits.len())
        .param("seed", seed)
        .aux("dot", dot))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_value() {
        assert!((dft_threshold(80_000) - 489.549).abs() < 5e-4);
    }

    #[test]
    fn constant_block_fails() {
        let r = spectral_dft(&vec![1u8; 4096]).unwrap();
        assert!(r.p_value.value < 1e-10);
        assert!(spectral_dft(&[0u8; 1001]).is_err());
    }

    #[test]
    fn alternating_correlation() {
        let alt: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        let g = block_autocorrelation(&alt, 20).unwrap();
        for (s, v) in g.iter().enumerate() {
            let want = if s % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - want).abs() < 1e-12, "lag {s}");
        }
        assert!(block_autocorrelation(&alt, 101).is_err());
    }

    #[test]
    fn self_correlation_is_maximal() {
        let bits = fair_bits(&mut substream(9, 0), 10_000);
        let r = cross_correlation_random(&bits, 9).unwrap();
        assert_eq!(r.aux.unwrap()["dot"], 10_000);
        assert!(r.p_value.value < 1e-100);
    }
}
