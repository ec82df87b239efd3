//! Number theory along the square-free numbers: primes, prime-divisor
//! counts, primorials and the class decomposition `N_k`.
//!
//! Statistics "over the first `n` square-free numbers" are computed over the
//! integer range `[1, sqf_n]`, which contains exactly those numbers.

use std::io::Write;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::seqgen::{base_primes, nth_squarefree, par_fold_segments, SieveConfig};
use crate::statcore::quad::adaptive_simpson;
use crate::statcore::{chi2_pvalue, expint_e1, ln_gamma, zeta, PValue, EULER_GAMMA};

const SQF_SCALE: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

fn check_ordinal(n: u64) -> Result<()> {
    if n == 0 {
        return arg("ordinals start at 1");
    }
    Ok(())
}

/// Trial-division primality test.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 || p % 3 == 0 {
        return false;
    }
    let mut d = 5;
    while d * d <= p {
        if p % d == 0 || p % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Distinct prime factors of `v`, or `None` if a square divides it.
fn squarefree_factors(mut v: u64) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= v {
        if v % d == 0 {
            v /= d;
            if v % d == 0 {
                return None;
            }
            out.push(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if v > 1 {
        out.push(v);
    }
    Some(out)
}

/// Product of the first `q` primes.
pub fn primorial(q: u32) -> Result<BigUint> {
    if q == 0 {
        return arg("primorial needs q >= 1");
    }
    let mut limit = 64u64;
    loop {
        let t = base_primes(limit);
        let upto: Vec<u32> = t.primes.iter().copied().take_while(|&p| p as u64 <= limit).collect();
        if upto.len() >= q as usize {
            return Ok(upto[..q as usize].iter().fold(BigUint::from(1u32), |acc, &p| acc * p));
        }
        limit *= 2;
    }
}

/// The `η` with `ℙ(η) ≤ v < ℙ(η+1)`, for square-free `v ≥ 2`.
pub fn term_count(v: u64) -> Result<u32> {
    if v < 2 {
        return arg("term count needs a value >= 2");
    }
    if squarefree_factors(v).is_none() {
        return arg(format!("{v} is not square-free"));
    }
    let mut prod: u128 = 1;
    let mut eta = 0;
    for &p in base_primes(100).primes.iter() {
        let next = prod * p as u128;
        if next > v as u128 {
            return Ok(eta);
        }
        prod = next;
        eta += 1;
    }
    unreachable!("u64 values exceed no more than 15 primorials")
}

/// Number of distinct prime factors of a square-free value.
pub fn omega(v: u64) -> Result<u32> {
    if v == 0 {
        return arg("ω(0) is undefined");
    }
    squarefree_factors(v).map(|f| f.len() as u32).ok_or_else(|| Error::Argument(format!("{v} is not square-free")))
}

/// Primes among `sqf_1 .. sqf_n`, i.e. `π(sqf_n)`.
pub fn pi_sqf_exact(n: u64) -> Result<u64> {
    check_ordinal(n)?;
    let top = nth_squarefree(n)?;
    par_fold_segments(
        1,
        top + 1,
        &SieveConfig::default(),
        |_, om| om.iter().filter(|&&o| o == 1).count() as u64,
        0,
        |a, b| a + b,
    )
}

/// `Li_sq(sqf_n) = ∫_2^{sqf_n} dx / ln(x+1)` by adaptive Simpson to 1e-6.
pub fn pi_sqf_theoretical(n: u64) -> Result<f64> {
    check_ordinal(n)?;
    li_sq(nth_squarefree(n)? as f64)
}

pub fn li_sq(x: f64) -> Result<f64> {
    if x <= 2.0 {
        return Ok(0.0);
    }
    adaptive_simpson(|t| 1.0 / (t + 1.0).ln(), 2.0, x, 1e-6)
}

/// Fraction of the first `n` square-free numbers divisible by `p`, with
/// the prediction `1/(p+1)`.
pub fn divisor_probability_check(p: u64, n: u64) -> Result<(f64, f64)> {
    check_ordinal(n)?;
    let top = nth_squarefree(n)?;
    let hits = count_divisible(p, top)?;
    Ok((hits as f64 / n as f64, 1.0 / (p as f64 + 1.0)))
}

/// As [`divisor_probability_check`] but over the square-free numbers `≤ x`.
pub fn divisor_probability_up_to(p: u64, x: u64) -> Result<(f64, f64)> {
    if x == 0 {
        return arg("x must be >= 1");
    }
    let hits = count_divisible(p, x)?;
    let total = crate::seqgen::squarefree_count(x)?;
    Ok((hits as f64 / total as f64, 1.0 / (p as f64 + 1.0)))
}

fn count_divisible(p: u64, top: u64) -> Result<u64> {
    if !is_prime(p) {
        return arg(format!("{p} is not prime"));
    }
    par_fold_segments(
        1,
        top + 1,
        &SieveConfig::default(),
        |s, om| {
            let mut j = (s.div_ceil(p) * p - s) as usize;
            let mut c = 0u64;
            while j < om.len() {
                c += (om[j] >= 0) as u64;
                j += p as usize;
            }
            c
        },
        0,
        |a, b| a + b,
    )
}

/// Constants in the mean and variance of `ω` over square-free numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// `γ + Σ_{k≥2} μ(k)/k · ln ζ(k)`.
    pub kronecker_a: f64,
    /// `∫_2^∞ dt / (t (t+1) ln t)`.
    pub series_b: f64,
    /// `A - B`.
    pub omega_offset: f64,
    /// `∫_2^∞ dt / ((t+1)² ln t)`.
    pub variance_correction: f64,
}

pub fn constants_compute() -> Constants {
    let ln2 = std::f64::consts::LN_2;
    let mu = crate::seqgen::mu_table(64).expect("small table");
    let mut a = EULER_GAMMA;
    for (k, &m) in mu.iter().enumerate().take(65).skip(2) {
        let kf = k as f64;
        if 2f64.powf(-kf) / kf < 1e-13 {
            break;
        }
        if m != 0 {
            a += m as f64 / kf * zeta(kf).expect("s >= 2").ln();
        }
    }
    // ∫_2^∞ t^{-k} / ln t dt = E1((k-1) ln 2)
    let mut b = 0.0;
    for k in 2.. {
        let t = expint_e1((k - 1) as f64 * ln2).expect("positive argument");
        b += if k % 2 == 0 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    let mut c = 0.0;
    for k in 1.. {
        let t = k as f64 * expint_e1(k as f64 * ln2).expect("positive argument");
        c += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    Constants { kronecker_a: a, series_b: b, omega_offset: a - b, variance_correction: c }
}

/// `ln ln((π²/6) n + 1)`, the leading term of the mean of `ω̂`.
pub fn loglog_scale(n: u64) -> f64 {
    (SQF_SCALE * n as f64 + 1.0).ln().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaStats {
    pub n: u64,
    pub mean_observed: f64,
    pub mean_theoretical: f64,
    pub variance_observed: f64,
    pub lambda: f64,
}

/// Observed mean and variance of `ω̂(k)` for `k ≤ n`, against
/// `ln ln((π²/6) n + 1) + A - B`.
pub fn omega_stats(n: u64) -> Result<OmegaStats> {
    if n < 1000 {
        return arg("the mean of ω is only compared for n >= 1000");
    }
    let cc = class_counts(n)?;
    let (mut s1, mut s2) = (0f64, 0f64);
    for (k, &c) in cc.counts.iter().enumerate() {
        s1 += (k as u64 * c) as f64;
        s2 += (k as u64 * k as u64 * c) as f64;
    }
    let mean = s1 / n as f64;
    let var = s2 / n as f64 - mean * mean;
    let theo = loglog_scale(n) + constants_compute().omega_offset;
    Ok(OmegaStats { n, mean_observed: mean, mean_theoretical: theo, variance_observed: var, lambda: theo - 1.0 })
}

/// Counts `N_k` of square-free numbers `≤ sqf_n` with exactly `k` prime
/// factors. `counts[0]` is the unit, so `Σ counts = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub n: u64,
    pub counts: Vec<u64>,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl ClassCounts {
    /// `Σ_k (-1)^k N_k`, equal to `M̂(n)`.
    pub fn alternating_sum(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    /// `N_k`, zero past the largest class.
    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Most populated class with `k ≥ 1`.
    pub fn mode(&self) -> usize {
        (1..self.counts.len()).max_by_key(|&k| self.counts[k]).unwrap_or(0)
    }
}

pub fn class_counts(n: u64) -> Result<ClassCounts> {
    check_ordinal(n)?;
    let top = nth_squarefree(n)?;
    let counts = par_fold_segments(
        1,
        top + 1,
        &SieveConfig::default(),
        |_, om| {
            let mut h = [0u64; 16];
            for &o in om {
                if o >= 0 {
                    h[o as usize] += 1;
                }
            }
            h
        },
        [0u64; 16],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )?;
    let last = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    let counts = counts[..=last].to_vec();
    let n_plus = counts.iter().step_by(2).sum();
    let n_minus = counts.iter().skip(1).step_by(2).sum();
    Ok(ClassCounts { n, counts, n_plus, n_minus })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonFit {
    pub lambda: f64,
    /// `(k, observed, expected)` for the categories entering χ².
    pub categories: Vec<(usize, f64, f64)>,
    pub chi2: f64,
    pub dof: u32,
    pub p_value: PValue,
}

/// Compares `N_k` (`k ≥ 1`) with a shifted Poisson law
/// `λ^{k-1} e^{-λ} / (k-1)!`.
pub fn poisson_fit(cc: &ClassCounts, lambda: f64) -> Result<PoissonFit> {
    let observed: Vec<f64> = cc.counts.iter().skip(1).map(|&c| c as f64).collect();
    poisson_fit_frequencies(&observed, lambda)
}

/// As [`poisson_fit`] with `observed[i]` the (possibly fractional) count of
/// class `k = i + 1`.
pub fn poisson_fit_frequencies(observed: &[f64], lambda: f64) -> Result<PoissonFit> {
    if !(lambda > 0.0) {
        return arg(format!("Poisson rate must be positive, got {lambda}"));
    }
    let total: f64 = observed.iter().sum();
    let mut categories = Vec::new();
    let kmax = observed.len().max((lambda + 10.0 * lambda.sqrt() + 10.0) as usize);
    for i in 0..kmax {
        let j = i as f64;
        let expected = total * (j * lambda.ln() - lambda - ln_gamma(j + 1.0)).exp();
        if expected >= 5.0 {
            categories.push((i + 1, observed.get(i).copied().unwrap_or(0.0), expected));
        }
    }
    if categories.len() < 2 {
        return Err(Error::Degenerate("fewer than two classes have expected count >= 5".into()));
    }
    let chi2 = categories.iter().map(|&(_, o, e)| (o - e).powi(2) / e).sum();
    let dof = categories.len() as u32 - 1;
    Ok(PoissonFit { lambda, categories, chi2, dof, p_value: chi2_pvalue(chi2, dof)? })
}

/// `(ω - L)/√L` with `L = ln ln((π²/6) n + 1)`.
pub fn erdos_kac_normalize(n: u64, omega_value: u32) -> Result<f64> {
    if n == 0 {
        return arg("ordinals start at 1");
    }
    let l = loglog_scale(n);
    if !(l > 0.0) {
        return arg(format!("ln ln scale not positive at n = {n}"));
    }
    Ok((omega_value as f64 - l) / l.sqrt())
}

/// One row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub observed: f64,
    pub theoretical: f64,
    pub relative_error: f64,
}

impl TableRow {
    pub fn new(n: u64, observed: f64, theoretical: f64) -> Self {
        let relative_error = if observed != 0.0 { ((observed - theoretical) / observed).abs() } else { f64::NAN };
        TableRow { n, observed, theoretical, relative_error }
    }
}

pub fn pi_table(ns: &[u64]) -> Result<Vec<TableRow>> {
    ns.iter().map(|&n| Ok(TableRow::new(n, pi_sqf_exact(n)? as f64, pi_sqf_theoretical(n)?))).collect()
}

pub fn omega_table(ns: &[u64]) -> Result<Vec<TableRow>> {
    ns.iter()
        .map(|&n| {
            let s = omega_stats(n)?;
            Ok(TableRow::new(n, s.mean_observed, s.mean_theoretical))
        })
        .collect()
}

/// Rows keyed by the prime `p` in the `n` column.
pub fn divisor_table(primes: &[u64], n: u64) -> Result<Vec<TableRow>> {
    primes
        .iter()
        .map(|&p| {
            let (e, t) = divisor_probability_check(p, n)?;
            Ok(TableRow::new(p, e, t))
        })
        .collect()
}

/// CSV with header `n,observed,theoretical,relative_error`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Argument(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqf_list(limit: u64) -> Vec<u64> {
        (1..=limit).filter(|&m| squarefree_factors(m).is_some()).collect()
    }

    #[test]
    fn primorial_values() {
        assert_eq!(primorial(1).unwrap(), BigUint::from(2u32));
        assert_eq!(primorial(5).unwrap(), BigUint::from(2310u32));
        assert_eq!(primorial(10).unwrap(), BigUint::from(6_469_693_230u64));
        assert_eq!(primorial(15).unwrap().to_string(), "614889782588491410");
        assert!(primorial(0).is_err());
    }

    #[test]
    fn term_count_values() {
        assert_eq!(term_count(2).unwrap(), 1);
        assert_eq!(term_count(105).unwrap(), 3);
        assert_eq!(term_count(6_469_693_230).unwrap(), 10);
        assert_eq!(term_count(6_469_693_229).unwrap(), 9);
        assert!(term_count(12).is_err());
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega(1).unwrap(), 0);
        assert_eq!(omega(30).unwrap(), 3);
        assert_eq!(omega(510_510).unwrap(), 7);
        assert!(omega(18).is_err());
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(pi_sqf_exact(8).unwrap(), 5);
        let (e, t) = divisor_probability_check(2, 3).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15 && (t - 1.0 / 3.0).abs() < 1e-15);
        let cc = class_counts(7).unwrap();
        assert_eq!(cc.counts, vec![1, 4, 2]);
        assert_eq!((cc.n_plus, cc.n_minus), (3, 4));
        assert!(divisor_probability_check(4, 10).is_err());
    }

    #[test]
    fn class_counts_against_enumeration() {
        let list = sqf_list(20_000);
        for &n in &[1u64, 2, 10, 100, 1000, 5000, list.len() as u64] {
            let cc = class_counts(n).unwrap();
            let mut want = vec![0u64; cc.counts.len()];
            for &v in &list[..n as usize] {
                want[omega(v).unwrap() as usize] += 1;
            }
            assert_eq!(cc.counts, want, "n = {n}");
            assert_eq!(cc.counts.iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn constants_match_quadrature() {
        let c = constants_compute();
        // u = 1/t maps [2, ∞) onto (0, 1/2]
        let b =
            crate::statcore::quad::gauss_kronrod(|u: f64| 1.0 / ((1.0 + u) * -u.ln()), 0.0, 0.5, 1e-13, 0.0).unwrap();
        let v =
            crate::statcore::quad::gauss_kronrod(|u: f64| 1.0 / ((1.0 + u).powi(2) * -u.ln()), 0.0, 0.5, 1e-13, 0.0)
                .unwrap();
        assert!((c.series_b - b).abs() < 1e-10, "{} vs {b}", c.series_b);
        assert!((c.variance_correction - v).abs() < 1e-10);
        assert!((c.kronecker_a - 0.261_497).abs() < 1e-6, "{}", c.kronecker_a);
        assert!((c.omega_offset + 0.029_982).abs() < 1e-6);
    }

    #[test]
    fn poisson_exact_input() {
        let lambda: f64 = 1.7;
        let total = 1e6;
        let obs: Vec<f64> =
            (0..40).map(|j| total * (j as f64 * lambda.ln() - lambda - ln_gamma(j as f64 + 1.0)).exp()).collect();
        let fit = poisson_fit_frequencies(&obs, lambda).unwrap();
        assert!(fit.chi2 < 1e-12);
        assert!((fit.p_value.value - 1.0).abs() < 1e-12);
        assert!(matches!(poisson_fit_frequencies(&[3.0, 1.0], 0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn erdos_kac_basics() {
        let n = 1_000_000;
        let l = loglog_scale(n);
        assert!(erdos_kac_normalize(n, 3).unwrap() < erdos_kac_normalize(n, 4).unwrap());
        assert!((erdos_kac_normalize(n, 0).unwrap() + l.sqrt()).abs() < 1e-12);
        assert!(erdos_kac_normalize(0, 1).is_err());
    }

    #[test]
    fn li_sq_by_kronrod() {
        let x = 1_644_918.0;
        let s = li_sq(x).unwrap();
        let k = crate::statcore::quad::gauss_kronrod(|t: f64| 1.0 / (t + 1.0).ln(), 2.0, x, 1e-8, 0.0).unwrap();
        assert!((s - k).abs() < 1e-5, "{s} vs {k}");
    }
}
