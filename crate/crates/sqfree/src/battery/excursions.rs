use super::TestResult;
use crate::error::{arg, Result};
use crate::statcore::chi2_pvalue;

pub const EXCURSION_STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
pub const MIN_CYCLES: u64 = 800;

/// Result of the excursions test: one result per state, or a skip when the
/// walk returns to zero too rarely for the χ² approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Excursions {
    Tested(Vec<TestResult>),
    InsufficientCycles { cycles: u64 },
}

/// Probabilities of `k = 0..4` visits and of `≥ 5` visits to state `x` in one cycle.
pub fn excursion_probabilities(x: i64) -> [f64; 6] {
    let a = x.unsigned_abs() as f64;
    let q = 1.0 - 1.0 / (2.0 * a);
    let mut p = [0.0; 6];
    p[0] = q;
    for (k, pk) in p.iter_mut().enumerate().take(5).skip(1) {
        *pk = q.powi(k as i32 - 1) / (4.0 * a * a);
    }
    p[5] = q.powi(4) / (2.0 * a);
    p
}

/// The walk `0, S_1, …, S_n, 0` of partial sums of μ̂.
pub fn augmented_walk(bits: &[u8]) -> Vec<i64> {
    let mut path = Vec::with_capacity(bits.len() + 2);
    path.push(0);
    let mut s = 0i64;
    for &b in bits {
        s += if b != 0 { 1 } else { -1 };
        path.push(s);
    }
    if s != 0 {
        path.push(0);
    }
    path
}

/// Visits of `x` in each zero-to-zero cycle of `path` (which must start and end at 0).
pub fn cycle_visits(path: &[i64], x: i64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut cur = 0;
    for &s in path.iter().skip(1) {
        if s == 0 {
            out.push(cur);
            cur = 0;
        } else if s == x {
            cur += 1;
        }
    }
    out
}

/// Random excursions test for the states `±1..±4`.
pub fn random_excursions(bits: &[u8]) -> Result<Excursions> {
    if bits.is_empty() {
        return arg("random excursions needs a non-empty block");
    }
    let path = augmented_walk(bits);
    let j = path.iter().skip(1).filter(|&&s| s == 0).count() as u64;
    if j < MIN_CYCLES {
        return Ok(Excursions::InsufficientCycles { cycles: j });
    }
    let mut visits = [[0u64; 6]; 8];
    let mut cur = [0u64; 8];
    for &s in path.iter().skip(1) {
        if s == 0 {
            for (v, c) in visits.iter_mut().zip(cur.iter_mut()) {
                v[(*c).min(5) as usize] += 1;
                *c = 0;
            }
        } else if (-4..=4).contains(&s) {
            cur[(if s < 0 { s + 4 } else { s + 3 }) as usize] += 1;
        }
    }
    let mut out = Vec::with_capacity(8);
    for (x, nu) in EXCURSION_STATES.iter().zip(visits) {
        let pi = excursion_probabilities(*x);
        let chi2: f64 = nu
            .iter()
            .zip(pi)
            .map(|(&v, p)| {
                let e = j as f64 * p;
                (v as f64 - e).powi(2) / e
            })
            .sum();
        out.push(
            TestResult::new("random_excursions", chi2, chi2_pvalue(chi2, 5)?)
                .param("x", *x)
                .aux("cycles", j)
                .aux("counts", nu.to_vec()),
        );
    }
    Ok(Excursions::Tested(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_sum_to_one() {
        let p1 = excursion_probabilities(1);
        assert_eq!(p1, [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.03125]);
        for x in EXCURSION_STATES {
            let s: f64 = excursion_probabilities(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn toy_walk_table() {
        let path = [0, 1, 0, -1, -2, -1, 0, 1, 2, 1, 2, 0];
        assert_eq!(cycle_visits(&path, 1), vec![1, 0, 2]);
        assert_eq!(cycle_visits(&path, 2), vec![0, 0, 2]);
        assert_eq!(cycle_visits(&path, -1), vec![0, 2, 0]);
        assert_eq!(cycle_visits(&path, -2), vec![0, 1, 0]);
        assert_eq!(cycle_visits(&path, 3), vec![0, 0, 0]);
        let bits = [1u8, 0, 0, 0, 1, 1, 1, 1, 0, 1];
        assert_eq!(augmented_walk(&bits), path);
    }

    #[test]
    fn too_few_cycles() {
        let ones = vec![1u8; 2000];
        assert_eq!(random_excursions(&ones).unwrap(), Excursions::InsufficientCycles { cycles: 1 });
    }
}
