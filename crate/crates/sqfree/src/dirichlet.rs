//! Dirichlet characters modulo a prime, Mertens sums twisted by a character
//! or restricted to a residue class, and square-free counts in arithmetic
//! progressions.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::numth::{csv_err, is_prime};
use crate::seqgen::{for_each_segment, omega_to_mu, SieveConfig};

/// Largest modulus accepted; construction verifies every axiom in `O(q²)`.
pub const MAX_MODULUS: u64 = 10_000;

const AXIOM_TOL: f64 = 1e-12;

/// The `φ(q) = q − 1` characters modulo a prime `q`, built from the smallest
/// primitive root `g`: `χ_j(g^a) = e^{2πi j a / (q−1)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterTable {
    pub q: u64,
    pub phi: u64,
    pub generator: u64,
    /// Discrete logarithm of `m` base `g` for `m = 0..q−1` (`None` at `m = 0`).
    index: Vec<Option<u64>>,
    pub principal_index: usize,
}

/// One character `χ_j` of a [`CharacterTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    pub q: u64,
    pub j: u64,
    values: Vec<Complex64>,
    phases: Vec<Option<u64>>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root of a prime `q`.
pub fn primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    if q == 2 {
        return Ok(1);
    }
    let fs = prime_factors(q - 1);
    (2..q)
        .find(|&g| fs.iter().all(|&p| pow_mod(g, (q - 1) / p, q) != 1))
        .ok_or_else(|| Error::Invariant(format!("no primitive root found mod {q}")))
}

impl Character {
    /// `χ(m)`, periodic in `m` with period `q`.
    pub fn eval(&self, m: u64) -> Complex64 {
        self.values[(m % self.q) as usize]
    }

    /// `χ(m) = e^{2πi k/φ}` as the integer `k`, or `None` when `q | m`.
    pub fn phase(&self, m: u64) -> Option<u64> {
        self.phases[(m % self.q) as usize]
    }

    pub fn is_principal(&self) -> bool {
        self.j == 0
    }

    /// Values for `m = 0..q−1`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Builds the character table mod a prime `q ≤` [`MAX_MODULUS`] and checks
/// every character axiom.
pub fn character_table(q: u64) -> Result<CharacterTable> {
    if !is_prime(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    if q > MAX_MODULUS {
        return arg(format!("modulus {q} exceeds {MAX_MODULUS}"));
    }
    let g = primitive_root(q)?;
    let mut index = vec![None; q as usize];
    let mut x = 1u64;
    for a in 0..q - 1 {
        index[x as usize] = Some(a);
        x = x * g % q;
    }
    let table = CharacterTable { q, phi: q - 1, generator: g, index, principal_index: 0 };
    table.verify()?;
    Ok(table)
}

impl CharacterTable {
    pub fn len(&self) -> usize {
        self.phi as usize
    }

    pub fn is_empty(&self) -> bool {
        self.phi == 0
    }

    pub fn character(&self, j: usize) -> Result<Character> {
        if j as u64 >= self.phi {
            return arg(format!("character index {j} out of range 0..{}", self.phi));
        }
        let j = j as u64;
        let phases: Vec<Option<u64>> = self.index.iter().map(|i| i.map(|a| a * j % self.phi)).collect();
        let values = phases
            .iter()
            .map(|p| match p {
                None => Complex64::new(0.0, 0.0),
                Some(0) => Complex64::new(1.0, 0.0),
                Some(k) => Complex64::from_polar(1.0, TAU * *k as f64 / self.phi as f64),
            })
            .collect();
        Ok(Character { q: self.q, j, values, phases })
    }

    pub fn characters(&self) -> Vec<Character> {
        (0..self.len()).map(|j| self.character(j).expect("index in range")).collect()
    }

    /// Periodicity, `χ(0) = 0`, `χ(1) = 1`, complete multiplicativity,
    /// `χ^φ = 1` on units, and the row sums `φ(q)` (principal) / `0` (others).
    fn verify(&self) -> Result<()> {
        let q = self.q;
        let fail = |what: &str, j: usize| Err(Error::Invariant(format!("character {j} mod {q}: {what}")));
        for (j, chi) in self.characters().iter().enumerate() {
            if chi.eval(0) != Complex64::new(0.0, 0.0) || chi.phase(q).is_some() {
                return fail("chi(0) != 0", j);
            }
            if chi.phase(1) != Some(0) || chi.eval(q + 1) != chi.eval(1) {
                return fail("chi(1) != 1 or not periodic", j);
            }
            for n in 1..q {
                let pn = chi.phase(n).expect("unit");
                if pn * self.phi % self.phi != 0 || (chi.eval(n).powu(self.phi as u32) - 1.0).norm() > 1e-9 {
                    return fail("chi^phi != 1", j);
                }
                for m in 1..q {
                    let pm = chi.phase(m).expect("unit");
                    if chi.phase(n * m) != Some((pn + pm) % self.phi) {
                        return fail("not multiplicative", j);
                    }
                }
            }
            let sum: Complex64 = (1..q).map(|m| chi.eval(m)).sum();
            let want = if j == self.principal_index { self.phi as f64 } else { 0.0 };
            if (sum - want).norm() > AXIOM_TOL * q as f64 * 100.0 {
                return fail("row sum", j);
            }
        }
        Ok(())
    }
}

/// `G(χ) = Σ_{m=1}^{q−1} χ(m) e^{2πi m/q}`.
pub fn gauss_sum(chi: &Character) -> Complex64 {
    (1..chi.q).map(|m| chi.eval(m) * Complex64::from_polar(1.0, TAU * m as f64 / chi.q as f64)).sum()
}

/// `M_χ(x) = Σ_{m≤x} μ(m) χ(m)`, summed directly.
pub fn generalized_mertens(chi: &Character, x: u64) -> Result<Complex64> {
    if x == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for_each_segment(1, x + 1, &SieveConfig::default(), |lo, om| {
        let mut part = Complex64::new(0.0, 0.0);
        for (i, &w) in om.iter().enumerate() {
            let mu = omega_to_mu(w);
            if mu != 0 {
                part += chi.eval(lo + i as u64) * mu as f64;
            }
        }
        total += part;
        Ok(())
    })?;
    Ok(total)
}

/// Per-residue sums over `1 ≤ m ≤ x` of `μ(m)`, or of the
/// square-free indicator, evaluated at each checkpoint.
fn residue_profile(q: u64, checkpoints: &[u64], squarefree: bool) -> Result<Vec<Vec<i64>>> {
    if q == 0 {
        return arg("modulus must be >= 1");
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return arg("checkpoints must be sorted");
    }
    let x_max = checkpoints.last().copied().unwrap_or(0);
    let mut acc = vec![0i64; q as usize];
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] == 0 {
        out.push(acc.clone());
        next += 1;
    }
    for_each_segment(1, x_max + 1, &SieveConfig::default(), |lo, om| {
        let mut r = (lo % q) as usize;
        for (i, &w) in om.iter().enumerate() {
            acc[r] += if squarefree { (w >= 0) as i64 } else { omega_to_mu(w) as i64 };
            r += 1;
            if r == q as usize {
                r = 0;
            }
            let m = lo + i as u64;
            while next < checkpoints.len() && checkpoints[next] == m {
                out.push(acc.clone());
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// `M_r(x) = Σ_{1≤m≤x, m≡r (mod q)} μ(m)`.
pub fn residue_mertens(q: u64, r: u64, x: u64) -> Result<i64> {
    if r >= q {
        return arg(format!("residue {r} must be < {q}"));
    }
    Ok(residue_profile(q, &[x], false)?[0][r as usize])
}

/// `M_r(x)` for every residue `r` at once.
pub fn residue_mertens_all(q: u64, x: u64) -> Result<Vec<i64>> {
    Ok(residue_profile(q, &[x], false)?.remove(0))
}

/// `M_r` sampled at sorted checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueMertens {
    pub q: u64,
    pub r: u64,
    pub values: Vec<(u64, i64)>,
}

pub fn residue_mertens_profile(q: u64, r: u64, checkpoints: &[u64]) -> Result<ResidueMertens> {
    if r >= q {
        return arg(format!("residue {r} must be < {q}"));
    }
    let prof = residue_profile(q, checkpoints, false)?;
    Ok(ResidueMertens { q, r, values: checkpoints.iter().zip(prof).map(|(&x, v)| (x, v[r as usize])).collect() })
}

/// `Σ_r χ(r) M_r(x)`.
pub fn decomposed_mertens(chi: &Character, residues: &[i64]) -> Complex64 {
    residues.iter().enumerate().map(|(r, &m)| chi.eval(r as u64) * m as f64).sum()
}

/// Square-free count in one residue class against its density estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressionCount {
    pub q: u64,
    pub r: u64,
    pub x: u64,
    pub count: u64,
    pub estimate: f64,
    pub relative_error: f64,
}

/// `(6/π²) X/q · (1 − 1/q²)^{-1}` for `r ≠ 0`; `(6/π²) X/(q+1)` for `r = 0`.
pub fn progression_estimate(q: u64, r: u64, x: u64) -> f64 {
    let c = 6.0 / (PI * PI) * x as f64;
    let qf = q as f64;
    if r == 0 {
        c / (qf + 1.0)
    } else {
        c / qf / (1.0 - 1.0 / (qf * qf))
    }
}

/// Square-free `m` with `2 ≤ m ≤ X` and `m ≡ r (mod q)`, for all residues `r`.
pub fn progression_table(q: u64, x: u64) -> Result<Vec<ProgressionCount>> {
    if !is_prime(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    if x < q {
        return arg(format!("X = {x} must be at least q = {q}"));
    }
    let mut counts = residue_profile(q, &[x], true)?.remove(0);
    counts[1 % q as usize] -= 1;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(r, c)| {
            let estimate = progression_estimate(q, r as u64, x);
            ProgressionCount {
                q,
                r: r as u64,
                x,
                count: c as u64,
                estimate,
                relative_error: (c as f64 - estimate).abs() / c as f64,
            }
        })
        .collect())
}

/// One row of [`progression_table`].
pub fn squarefree_in_progression(q: u64, r: u64, x: u64) -> Result<ProgressionCount> {
    if r >= q {
        return arg(format!("residue {r} must be < {q}"));
    }
    Ok(progression_table(q, x)?.swap_remove(r as usize))
}

/// CSV with header `q,r,x,count,estimate,relative_error`.
pub fn write_progression_csv<W: Write>(rows: &[ProgressionCount], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `A_q = ((q−1)/√q) √((1 − 1/q²)^{-1})`.
pub fn aq_bound(q: u64) -> f64 {
    let qf = q as f64;
    (qf - 1.0) / qf.sqrt() * (1.0 / (1.0 - 1.0 / (qf * qf))).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqRow {
    pub j: u64,
    pub max_ratio: f64,
    pub argmax: u64,
}

/// Largest `|M_χ(x)|/√x` over the checkpoints for each non-principal `χ`,
/// next to `A_q`. `slack` is the largest ratio divided by `A_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqReport {
    pub q: u64,
    pub a_q: f64,
    pub rows: Vec<AqRow>,
    pub slack: f64,
}

pub fn aq_bound_diagnostic(q: u64, checkpoints: &[u64]) -> Result<AqReport> {
    let table = character_table(q)?;
    if checkpoints.is_empty() || checkpoints[0] == 0 {
        return arg("checkpoints must be non-empty and start at x >= 1");
    }
    let prof = residue_profile(q, checkpoints, false)?;
    let a_q = aq_bound(q);
    let mut rows = Vec::new();
    for chi in table.characters().into_iter().filter(|c| !c.is_principal()) {
        let (mut best, mut at) = (0.0f64, checkpoints[0]);
        for (&x, res) in checkpoints.iter().zip(&prof) {
            let ratio = decomposed_mertens(&chi, res).norm() / (x as f64).sqrt();
            if ratio > best {
                best = ratio;
                at = x;
            }
        }
        rows.push(AqRow { j: chi.j, max_ratio: best, argmax: at });
    }
    let slack = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max) / a_q;
    Ok(AqReport { q, a_q, rows, slack })
}

/// `1, 2, …, 10, 20, …, 100, 200, …` up to and including `x_max`.
pub fn decade_checkpoints(x_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut step = 1u64;
    let mut x = 1u64;
    while x <= x_max {
        out.push(x);
        if x == 10 * step {
            step *= 10;
        }
        x += step;
    }
    if out.last() != Some(&x_max) && x_max > 0 {
        out.push(x_max);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_character_mod_5() {
        let t = character_table(5).unwrap();
        assert_eq!(t.generator, 2);
        let real: Vec<Character> = t
            .characters()
            .into_iter()
            .filter(|c| !c.is_principal() && c.values().iter().all(|v| v.im.abs() < 1e-12))
            .collect();
        assert_eq!(real.len(), 1);
        let vals: Vec<f64> = (1..=5).map(|m| real[0].eval(m).re.round()).collect();
        assert_eq!(vals, vec![1.0, -1.0, -1.0, 1.0, 0.0]);
        assert!((gauss_sum(&real[0]).norm_sqr() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonality_mod_7() {
        let t = character_table(7).unwrap();
        let cs = t.characters();
        for a in &cs {
            for b in &cs {
                let s: Complex64 = (0..7).map(|m| a.eval(m) * b.eval(m).conj()).sum();
                let want = if a.j == b.j { 6.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
            }
            let g = gauss_sum(a);
            if a.is_principal() {
                assert!((g + 1.0).norm() < 1e-12);
            } else {
                assert!((g.norm_sqr() - 7.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn composite_rejected() {
        assert!(matches!(character_table(15), Err(Error::UnsupportedModulus(15))));
        assert!(matches!(character_table(1), Err(Error::UnsupportedModulus(1))));
    }

    #[test]
    fn mertens_decomposition() {
        let t = character_table(5).unwrap();
        let res = residue_mertens_all(5, 10_000).unwrap();
        assert_eq!(res.iter().sum::<i64>(), -23);
        for chi in t.characters() {
            assert_eq!(generalized_mertens(&chi, 1).unwrap(), Complex64::new(1.0, 0.0));
            let direct = generalized_mertens(&chi, 10_000).unwrap();
            assert!((direct - decomposed_mertens(&chi, &res)).norm() < 1e-9);
        }
        assert_eq!(residue_mertens(5, 1, 1).unwrap(), 1);
        assert_eq!(residue_mertens(5, 0, 5).unwrap(), -1);
        assert_eq!(residue_mertens(5, 0, 10).unwrap(), 0);
    }

    #[test]
    fn progression_small() {
        let rows = progression_table(7, 1000).unwrap();
        let total: u64 = rows.iter().map(|r| r.count).sum();
        assert_eq!(total, crate::seqgen::squarefree_count(1000).unwrap() - 1);
        let brute = (2..=1000u64).filter(|m| m % 7 == 3 && crate::numth::omega(*m).is_ok()).count() as u64;
        assert_eq!(rows[3].count, brute);
    }

    #[test]
    fn aq_values() {
        assert!((aq_bound(5) - 1.8257).abs() < 1e-4);
        let rep = aq_bound_diagnostic(5, &decade_checkpoints(10_000)).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.rows.iter().all(|r| r.max_ratio >= 1.0 && r.max_ratio.is_finite()));
        assert_eq!(decade_checkpoints(25), vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 25]);
    }
}
