use super::TestResult;
use crate::error::{arg, Result};
use crate::statcore::{chi2_pvalue_at, DEFAULT_ALPHA};

/// Template used by the default battery.
pub const DEFAULT_TEMPLATE: [u8; 8] = [0, 0, 1, 0, 1, 1, 0, 1];
pub const DEFAULT_SUB_BLOCKS: usize = 8;

/// True when no proper shift of `b` overlaps itself.
pub fn is_aperiodic(b: &[u8]) -> bool {
    (1..b.len()).all(|j| b[j..] != b[..b.len() - j])
}

/// Non-overlapping hits of `b` in `sub`: the window slides by one on a miss
/// and by `m` on a hit.
pub fn template_hits(sub: &[u8], b: &[u8]) -> u64 {
    let m = b.len();
    let (mut i, mut w) = (0, 0);
    while i + m <= sub.len() {
        if &sub[i..i + m] == b {
            w += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    w
}

/// `μ = (L−m+1)/2^m` and `σ² = L(2^{-m} − (2m−1)/2^{2m})`.
pub fn template_moments(l: usize, m: usize) -> (f64, f64) {
    let p = (-(m as f64)).exp2();
    let mu = (l - m + 1) as f64 * p;
    let var = l as f64 * (p - (2 * m - 1) as f64 * p * p);
    (mu, var)
}

/// Non-overlapping template matching over `sub_blocks` sub-blocks of length `⌊n / N⌋`.
pub fn nonoverlapping_template(bits: &[u8], template: &[u8], sub_blocks: usize) -> Result<TestResult> {
    let m = template.len();
    if m == 0 || template.iter().any(|&b| b > 1) {
        return arg("template must be a non-empty 0/1 string");
    }
    if !is_aperiodic(template) {
        return arg("template must be aperiodic");
    }
    if sub_blocks == 0 {
        return arg("need at least one sub-block");
    }
    let l = bits.len() / sub_blocks;
    if l <= m {
        return arg(format!("sub-block length {l} must exceed template length {m}"));
    }
    let (mu, var) = template_moments(l, m);
    let hits: Vec<u64> = bits.chunks_exact(l).take(sub_blocks).map(|s| template_hits(s, template)).collect();
    let chi2: f64 = hits.iter().map(|&w| (w as f64 - mu).powi(2) / var).sum();
    let p = chi2_pvalue_at(chi2, sub_blocks as f64, DEFAULT_ALPHA)?;
    let tpl: String = template.iter().map(|&b| char::from(b'0' + b)).collect();
    Ok(TestResult::new("nonoverlapping_template", chi2, p)
        .param("template", tpl)
        .param("sub_blocks", sub_blocks)
        .param("sub_block_len", l)
        .aux("hits", hits)
        .aux("mu", mu)
        .aux("sigma2", var))
}
