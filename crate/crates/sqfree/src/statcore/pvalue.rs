use serde::Serialize;

use super::special::{erfc, incomplete_gamma_q};
use crate::error::{arg, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;
/// Uniformity is accepted when the χ² P-value over the ten bins is at least this.
pub const UNIFORMITY_THRESHOLD: f64 = 1e-4;
pub const UNIFORMITY_MIN_SAMPLES: usize = 50;

/// A tail probability together with the level it is judged at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PValue {
    pub value: f64,
    pub alpha: f64,
    pub pass: bool,
}

impl PValue {
    /// Clamps to `[0, 1]`; passes when `value >= alpha`.
    pub fn new(value: f64, alpha: f64) -> Self {
        let value = if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) };
        PValue { value, alpha, pass: value >= alpha }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        PValue::new(self.value, alpha)
    }
}

/// `Q(dof/2, chi2/2)` at the default level.
pub fn chi2_pvalue(chi2: f64, dof: u32) -> Result<PValue> {
    chi2_pvalue_at(chi2, dof as f64, DEFAULT_ALPHA)
}

/// `Q(dof/2, chi2/2)` allowing a fractional number of degrees of freedom.
pub fn chi2_pvalue_at(chi2: f64, dof: f64, alpha: f64) -> Result<PValue> {
    if !(dof > 0.0) {
        return arg(format!("chi-square needs positive dof, got {dof}"));
    }
    if !(chi2 >= 0.0) {
        return arg(format!("chi-square statistic must be >= 0, got {chi2}"));
    }
    Ok(PValue::new(incomplete_gamma_q(dof / 2.0, chi2 / 2.0)?, alpha))
}

/// Two-sided normal tail `erfc(v/√2)`; pass `|statistic|`.
pub fn erfc_pvalue(v: f64) -> PValue {
    erfc_pvalue_at(v, DEFAULT_ALPHA)
}

pub fn erfc_pvalue_at(v: f64, alpha: f64) -> PValue {
    PValue::new(erfc(v.abs() / std::f64::consts::SQRT_2), alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionInterval {
    pub alpha: f64,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

impl ProportionInterval {
    pub fn contains(&self, proportion: f64) -> bool {
        proportion >= self.lo && proportion <= self.hi
    }
}

/// `(1-α) ± 3 √(α(1-α)/N)`.
pub fn proportion_interval(alpha: f64, n: usize) -> Result<ProportionInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if n == 0 {
        return arg("proportion interval needs N >= 1");
    }
    let centre = 1.0 - alpha;
    let half = 3.0 * (alpha * (1.0 - alpha) / n as f64).sqrt();
    Ok(ProportionInterval { alpha, n, lo: centre - half, hi: centre + half })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchProportion {
    pub batch: usize,
    pub n: usize,
    pub passed: usize,
    pub proportion: f64,
    pub interval: ProportionInterval,
    pub inside: bool,
}

/// Splits `pvalues` into consecutive batches of `batch` values (the last one
/// may be shorter) and checks each pass proportion against its interval.
pub fn proportion_check(pvalues: &[f64], alpha: f64, batch: usize) -> Result<Vec<BatchProportion>> {
    if batch == 0 {
        return arg("batch size must be >= 1");
    }
    pvalues
        .chunks(batch)
        .enumerate()
        .map(|(i, chunk)| {
            let passed = chunk.iter().filter(|&&p| p >= alpha).count();
            let proportion = passed as f64 / chunk.len() as f64;
            let interval = proportion_interval(alpha, chunk.len())?;
            Ok(BatchProportion {
                batch: i,
                n: chunk.len(),
                passed,
                proportion,
                interval,
                inside: interval.contains(proportion),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Uniformity {
    pub counts: [u64; 10],
    pub chi2: f64,
    pub p_bar: f64,
    pub uniform: bool,
}

/// Ten-bin χ² test of P-value uniformity.
pub fn pvalue_uniformity(pvalues: &[f64]) -> Result<Uniformity> {
    if pvalues.len() < UNIFORMITY_MIN_SAMPLES {
        return arg(format!("uniformity needs at least {UNIFORMITY_MIN_SAMPLES} P-values, got {}", pvalues.len()));
    }
    let mut counts = [0u64; 10];
    for &p in pvalues {
        let bin = ((p.clamp(0.0, 1.0) * 10.0) as usize).min(9);
        counts[bin] += 1;
    }
    Ok(uniformity_from_counts(counts))
}

pub(crate) fn uniformity_from_counts(counts: [u64; 10]) -> Uniformity {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p_bar = incomplete_gamma_q(4.5, chi2 / 2.0).unwrap_or(0.0).clamp(0.0, 1.0);
    Uniformity { counts, chi2, p_bar, uniform: p_bar >= UNIFORMITY_THRESHOLD }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_boundary_is_inclusive() {
        assert!(PValue::new(0.01, 0.01).pass);
        assert!(!PValue::new(0.009_999, 0.01).pass);
        assert_eq!(PValue::new(1.0 + 1e-13, 0.01).value, 1.0);
        assert_eq!(PValue::new(-1e-13, 0.01).value, 0.0);
    }

    #[test]
    fn chi2_at_mean_is_central() {
        for dof in 1..=64 {
            let p = chi2_pvalue(dof as f64, dof).unwrap().value;
            assert!(p > 0.3 && p < 0.6, "dof {dof}: {p}");
        }
        assert_eq!(chi2_pvalue(0.0, 3).unwrap().value, 1.0);
    }

    #[test]
    fn erfc_tail_values() {
        assert_eq!(erfc_pvalue(0.0).value, 1.0);
        assert_eq!((erfc_pvalue(0.98).value * 100.0).round() / 100.0, 0.33);
        assert_eq!((erfc_pvalue(0.80).value * 100.0).round() / 100.0, 0.42);
    }

    #[test]
    fn interval_small_batches() {
        let iv = proportion_interval(0.01, 30).unwrap();
        assert!((iv.lo - 0.9355).abs() < 1e-4 && (iv.hi - 1.0445).abs() < 1e-4);
        let ones = vec![1.0; 40];
        let r = proportion_check(&ones, 0.01, 20).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|b| b.inside && b.proportion == 1.0));
    }

    #[test]
    fn uniformity_extremes() {
        let flat: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let u = pvalue_uniformity(&flat).unwrap();
        assert_eq!(u.chi2, 0.0);
        assert_eq!(u.p_bar, 1.0);
        assert!(u.uniform);

        let lumped = vec![0.55; 100];
        let u = pvalue_uniformity(&lumped).unwrap();
        assert!((u.chi2 - 900.0).abs() < 1e-9);
        assert!(u.p_bar < 1e-100 && !u.uniform);

        assert!(pvalue_uniformity(&flat[..49]).is_err());
    }

    #[test]
    fn uniformity_weak_but_accepted() {
        // chi2 = 17.4 on 9 dof: P-bar of a few percent still counts as uniform
        let u = uniformity_from_counts([18, 4, 14, 6, 12, 8, 10, 10, 13, 5]);
        assert!((u.chi2 - 17.4).abs() < 1e-12);
        assert!(u.p_bar > 0.03 && u.p_bar < 0.05, "{}", u.p_bar);
        assert!(u.uniform);
    }
}
